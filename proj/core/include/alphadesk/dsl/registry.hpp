#pragma once

#include <string>
#include <vector>

#include "alphadesk/dsl/expr.hpp"

namespace alphadesk::dsl {

enum class OpCategory { elementwise, timeseries, cross_sectional, group, postprocess };

struct OperatorInfo {
  std::string name;
  OpCategory category;
  int arity;           // expression arguments (excludes the trailing parameter)
  ParamKind param;     // trailing parameter kind, ParamKind::none if absent
  NodeKind node_kind;  // unary | binary | call
};

class OperatorRegistry {
 public:
  // Built once, read-only afterwards; safe for concurrent lookups.
  static const OperatorRegistry& instance();

  const OperatorInfo* find(const std::string& name) const;  // nullptr when unknown
  const OperatorInfo& at(const std::string& name) const;    // throws DataError when unknown
  const std::vector<OperatorInfo>& all() const { return entries_; }

 private:
  OperatorRegistry();
  std::vector<OperatorInfo> entries_;  // sorted by name
};

}  // namespace alphadesk::dsl
