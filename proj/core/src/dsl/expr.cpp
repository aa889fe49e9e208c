#include "alphadesk/dsl/expr.hpp"

#include <algorithm>
#include <cmath>

#include "alphadesk/common/error.hpp"
#include "alphadesk/dsl/registry.hpp"

namespace alphadesk::dsl {

bool operator==(const Param& a, const Param& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ParamKind::none: return true;
    case ParamKind::window: return a.window == b.window;
    case ParamKind::group: return a.group == b.group;
    case ParamKind::fraction: return a.fraction == b.fraction;
  }
  return false;
}

ExprPtr constant(double v) {
  if (!std::isfinite(v)) {
    throw DataError("constant must be finite");
  }
  auto node = std::make_shared<Expr>();
  node->kind = NodeKind::constant;
  node->value = v;
  return node;
}

ExprPtr meta(std::string field) {
  if (field.empty()) {
    throw DataError("meta field name must be nonempty");
  }
  auto node = std::make_shared<Expr>();
  node->kind = NodeKind::meta;
  node->name = std::move(field);
  return node;
}

ExprPtr call(const std::string& op, std::vector<ExprPtr> args) {
  return call(op, std::move(args), Param{});
}

ExprPtr call(const std::string& op, std::vector<ExprPtr> args, Param param) {
  const OperatorInfo& info = OperatorRegistry::instance().at(op);
  if (static_cast<int>(args.size()) != info.arity) {
    throw DataError("arity mismatch: " + op + " expects " +
                    std::to_string(info.arity) + " argument(s), got " +
                    std::to_string(args.size()));
  }
  for (const auto& a : args) {
    if (!a) throw DataError("null argument to " + op);
  }
  if (param.kind != info.param) {
    throw DataError("parameter kind mismatch for " + op);
  }
  if (param.kind == ParamKind::window && param.window < 2) {
    throw DataError("window must be >= 2 for " + op + ", got " +
                    std::to_string(param.window));
  }
  if (param.kind == ParamKind::group && param.group.empty()) {
    throw DataError("group parameter must name a field for " + op);
  }
  if (param.kind == ParamKind::fraction &&
      !(param.fraction >= 0.0 && param.fraction < 0.5)) {
    throw DataError("fraction parameter must be in [0, 0.5) for " + op);
  }
  // Fold neg(constant) so negative literals have a single canonical tree and
  // print/parse stays an exact roundtrip.
  if (op == "neg" && args[0]->kind == NodeKind::constant) {
    return constant(-args[0]->value);
  }
  auto node = std::make_shared<Expr>();
  node->kind = info.node_kind;
  node->name = op;
  node->children = std::move(args);
  node->param = std::move(param);
  return node;
}

ExprPtr neg(ExprPtr child) { return call("neg", {std::move(child)}); }

ExprPtr windowed(const std::string& op, std::vector<ExprPtr> args, int window) {
  Param p;
  p.kind = ParamKind::window;
  p.window = window;
  return call(op, std::move(args), p);
}

ExprPtr grouped(const std::string& op, ExprPtr arg, std::string group_field) {
  Param p;
  p.kind = ParamKind::group;
  p.group = std::move(group_field);
  return call(op, {std::move(arg)}, p);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::constant:
      return a.value == b.value;
    case NodeKind::meta:
      return a.name == b.name;
    default:
      break;
  }
  if (a.name != b.name || !(a.param == b.param)) return false;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (const auto& c : e.children) n += node_count(*c);
  return n;
}

std::size_t depth(const Expr& e) {
  std::size_t best = 0;
  for (const auto& c : e.children) best = std::max(best, depth(*c));
  return best + 1;
}

namespace {

void collect_fields(const Expr& e, std::set<std::string>& out) {
  if (e.kind == NodeKind::meta) out.insert(e.name);
  if (e.param.kind == ParamKind::group) out.insert(e.param.group);
  for (const auto& c : e.children) collect_fields(*c, out);
}

}  // namespace

std::set<std::string> required_fields(const Expr& e) {
  std::set<std::string> out;
  collect_fields(e, out);
  return out;
}

}  // namespace alphadesk::dsl
