#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace alphadesk::dsl {

// Node taxonomy: unary/binary cover the parameterless elementwise and
// cross-sectional operators; call covers everything carrying a trailing
// window/group/fraction parameter.
enum class NodeKind { constant, meta, unary, binary, call };

enum class ParamKind { none, window, group, fraction };

struct Param {
  ParamKind kind = ParamKind::none;
  int window = 0;
  std::string group;
  double fraction = 0.0;
};

bool operator==(const Param& a, const Param& b);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
 public:
  NodeKind kind = NodeKind::constant;
  double value = 0.0;             // constant nodes
  std::string name;               // meta: field name; op nodes: operator name
  std::vector<ExprPtr> children;  // expression arguments, in call order
  Param param;                    // trailing parameter (call nodes only)
};

// Factories are the only sanctioned constructors: they validate against the
// operator registry (existence, arity, parameter kind, window >= 2) and fold
// neg(constant(c)) -> constant(-c) so negative literals stay canonical.
ExprPtr constant(double v);
ExprPtr meta(std::string field);
ExprPtr call(const std::string& op, std::vector<ExprPtr> args);
ExprPtr call(const std::string& op, std::vector<ExprPtr> args, Param param);

// Convenience wrappers for the common shapes.
ExprPtr neg(ExprPtr child);
ExprPtr windowed(const std::string& op, std::vector<ExprPtr> args, int window);
ExprPtr grouped(const std::string& op, ExprPtr arg, std::string group_field);

bool equal(const Expr& a, const Expr& b);
inline bool equal(const ExprPtr& a, const ExprPtr& b) { return equal(*a, *b); }

std::size_t node_count(const Expr& e);
std::size_t depth(const Expr& e);

// Meta leaves plus group parameters: everything the expression reads from a
// panel. Feeds factor-base dependency edges.
std::set<std::string> required_fields(const Expr& e);

}  // namespace alphadesk::dsl
