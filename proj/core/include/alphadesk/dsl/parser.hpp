#pragma once

#include <string>

#include "alphadesk/dsl/expr.hpp"

namespace alphadesk::dsl {

// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | NUMBER | IDENT | IDENT "(" arglist ")"
// Infix + - * / are sugar normalizing to add/sub/mul/safe_div calls; unary
// minus normalizes to neg (folded into the literal for constants).
// Identifiers are [a-z_][a-z0-9_]*. Every error message carries the byte
// offset of the offending token.
ExprPtr parse(const std::string& text);

// Canonical form: function-call syntax, one space after each comma, unary
// minus printed as a bare "-" prefix. parse(print(e)) is structurally equal
// to e; this text is the interchange format stored in the factor base.
std::string print(const Expr& expr);
inline std::string print(const ExprPtr& expr) { return print(*expr); }

}  // namespace alphadesk::dsl
