#include "alphadesk/dsl/parser.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/dsl/registry.hpp"

namespace alphadesk::dsl {

namespace {

enum class Tok { number, ident, plus, minus, star, slash, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

[[noreturn]] void fail(std::size_t offset, const std::string& what) {
  throw DataError("parse error at offset " + std::to_string(offset) + ": " + what);
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (digit(c)) {
      while (i < text.size() && digit(text[i])) ++i;
      if (i < text.size() && text[i] == '.') {
        ++i;
        if (i >= text.size() || !digit(text[i])) fail(i, "expected digit after `.`");
        while (i < text.size() && digit(text[i])) ++i;
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
        if (i >= text.size() || !digit(text[i])) fail(i, "expected digit in exponent");
        while (i < text.size() && digit(text[i])) ++i;
      }
      out.push_back({Tok::number, text.substr(start, i - start), start});
      continue;
    }
    if (ident_start(c)) {
      while (i < text.size() && ident_char(text[i])) ++i;
      out.push_back({Tok::ident, text.substr(start, i - start), start});
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::plus; break;
      case '-': kind = Tok::minus; break;
      case '*': kind = Tok::star; break;
      case '/': kind = Tok::slash; break;
      case '(': kind = Tok::lparen; break;
      case ')': kind = Tok::rparen; break;
      case ',': kind = Tok::comma; break;
      default:
        fail(start, std::string("unexpected character `") + c + "`");
    }
    out.push_back({kind, text.substr(start, 1), start});
    ++i;
  }
  out.push_back({Tok::end, "", text.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  ExprPtr run() {
    ExprPtr e = parse_expr();
    if (peek().kind != Tok::end) {
      fail(peek().offset, "unexpected trailing input `" + peek().text + "`");
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      bool plus = take().kind == Tok::plus;
      ExprPtr rhs = parse_term();
      lhs = call(plus ? "add" : "sub", {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      bool star = take().kind == Tok::star;
      ExprPtr rhs = parse_factor();
      lhs = call(star ? "mul" : "safe_div", {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_factor() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::minus:
        take();
        return neg(parse_factor());
      case Tok::number: {
        take();
        auto v = parse_double(tok.text);
        if (!v) fail(tok.offset, "bad number `" + tok.text + "`");
        return constant(*v);
      }
      case Tok::ident: {
        take();
        if (peek().kind == Tok::lparen) return parse_call(tok);
        return meta(tok.text);
      }
      case Tok::lparen:
        fail(tok.offset, "parenthesized grouping is not part of the grammar");
      default:
        fail(tok.offset, "expected expression");
    }
  }

  [[noreturn]] void fail_arity(const Token& at, const OperatorInfo& info) {
    std::string what = "arity mismatch: " + info.name + " expects " +
                       std::to_string(info.arity) + " argument(s)";
    switch (info.param) {
      case ParamKind::window: what += " plus a window"; break;
      case ParamKind::group: what += " plus a group field"; break;
      case ParamKind::fraction: what += " plus a fraction"; break;
      case ParamKind::none: break;
    }
    fail(at.offset, what);
  }

  ExprPtr parse_call(const Token& name_tok) {
    const OperatorInfo* info = OperatorRegistry::instance().find(name_tok.text);
    if (!info) fail(name_tok.offset, "unknown operator `" + name_tok.text + "`");
    take();  // '('
    std::vector<ExprPtr> args;
    for (int k = 0; k < info->arity; ++k) {
      if (k > 0) {
        if (peek().kind != Tok::comma) fail_arity(peek(), *info);
        take();
      }
      args.push_back(parse_expr());
    }
    Param param;
    param.kind = info->param;
    if (info->param != ParamKind::none) {
      if (peek().kind != Tok::comma) fail_arity(peek(), *info);
      take();
      parse_param(*info, param);
    }
    if (peek().kind == Tok::comma) fail_arity(peek(), *info);
    if (peek().kind != Tok::rparen) {
      if (peek().kind == Tok::end) fail(peek().offset, "expected `)` (unbalanced parenthesis)");
      fail(peek().offset, "expected `)`, got `" + peek().text + "`");
    }
    take();
    return call(name_tok.text, std::move(args), std::move(param));
  }

  void parse_param(const OperatorInfo& info, Param& param) {
    const Token& tok = peek();
    switch (info.param) {
      case ParamKind::window: {
        if (tok.kind != Tok::number ||
            tok.text.find_first_not_of("0123456789") != std::string::npos) {
          fail(tok.offset, "window must be an integer literal for " + info.name);
        }
        take();
        auto w = parse_int(tok.text);
        if (!w || *w < 2) {
          fail(tok.offset, "window must be an integer >= 2 for " + info.name +
                               ", got `" + tok.text + "`");
        }
        param.window = static_cast<int>(*w);
        return;
      }
      case ParamKind::group: {
        if (tok.kind != Tok::ident) {
          fail(tok.offset, "group parameter must be a field name for " + info.name);
        }
        take();
        if (peek().kind == Tok::lparen) {
          fail(peek().offset, "group parameter must be a bare field name for " + info.name);
        }
        param.group = tok.text;
        return;
      }
      case ParamKind::fraction: {
        if (tok.kind != Tok::number) {
          fail(tok.offset, "fraction parameter must be a numeric literal for " + info.name);
        }
        take();
        auto v = parse_double(tok.text);
        if (!v || !(*v >= 0.0 && *v < 0.5)) {
          fail(tok.offset, "fraction must be in [0, 0.5) for " + info.name +
                               ", got `" + tok.text + "`");
        }
        param.fraction = *v;
        return;
      }
      case ParamKind::none:
        return;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void print_into(const Expr& e, std::string& out) {
  switch (e.kind) {
    case NodeKind::constant:
      out += format_double(e.value);
      return;
    case NodeKind::meta:
      out += e.name;
      return;
    default:
      break;
  }
  if (e.name == "neg") {
    out += '-';
    print_into(*e.children[0], out);
    return;
  }
  out += e.name;
  out += '(';
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i > 0) out += ", ";
    print_into(*e.children[i], out);
  }
  switch (e.param.kind) {
    case ParamKind::window:
      out += ", ";
      out += std::to_string(e.param.window);
      break;
    case ParamKind::group:
      out += ", ";
      out += e.param.group;
      break;
    case ParamKind::fraction:
      out += ", ";
      out += format_double(e.param.fraction);
      break;
    case ParamKind::none:
      break;
  }
  out += ')';
}

}  // namespace

ExprPtr parse(const std::string& text) { return Parser(text).run(); }

std::string print(const Expr& expr) {
  std::string out;
  print_into(expr, out);
  return out;
}

}  // namespace alphadesk::dsl
