#include "alphadesk/dsl/registry.hpp"

#include <algorithm>

#include "alphadesk/common/error.hpp"

namespace alphadesk::dsl {

OperatorRegistry::OperatorRegistry() {
  auto add = [this](std::string name, OpCategory cat, int arity, ParamKind param,
                    NodeKind kind) {
    entries_.push_back({std::move(name), cat, arity, param, kind});
  };
  add("neg", OpCategory::elementwise, 1, ParamKind::none, NodeKind::unary);
  add("abs", OpCategory::elementwise, 1, ParamKind::none, NodeKind::unary);
  add("sign", OpCategory::elementwise, 1, ParamKind::none, NodeKind::unary);
  add("safe_sqrt", OpCategory::elementwise, 1, ParamKind::none, NodeKind::unary);
  add("safe_log", OpCategory::elementwise, 1, ParamKind::none, NodeKind::unary);
  add("add", OpCategory::elementwise, 2, ParamKind::none, NodeKind::binary);
  add("sub", OpCategory::elementwise, 2, ParamKind::none, NodeKind::binary);
  add("mul", OpCategory::elementwise, 2, ParamKind::none, NodeKind::binary);
  add("safe_div", OpCategory::elementwise, 2, ParamKind::none, NodeKind::binary);
  add("ts_mean", OpCategory::timeseries, 1, ParamKind::window, NodeKind::call);
  add("ts_std", OpCategory::timeseries, 1, ParamKind::window, NodeKind::call);
  add("ts_delta", OpCategory::timeseries, 1, ParamKind::window, NodeKind::call);
  add("ts_rank", OpCategory::timeseries, 1, ParamKind::window, NodeKind::call);
  add("ts_max", OpCategory::timeseries, 1, ParamKind::window, NodeKind::call);
  add("ts_min", OpCategory::timeseries, 1, ParamKind::window, NodeKind::call);
  add("ts_corr", OpCategory::timeseries, 2, ParamKind::window, NodeKind::call);
  add("decay_linear", OpCategory::timeseries, 1, ParamKind::window, NodeKind::call);
  add("rank", OpCategory::cross_sectional, 1, ParamKind::none, NodeKind::unary);
  add("zscore", OpCategory::cross_sectional, 1, ParamKind::none, NodeKind::unary);
  add("group_rank", OpCategory::group, 1, ParamKind::group, NodeKind::call);
  add("group_demean", OpCategory::group, 1, ParamKind::group, NodeKind::call);
  add("winsorize", OpCategory::postprocess, 1, ParamKind::fraction, NodeKind::call);
  add("neutralize", OpCategory::postprocess, 1, ParamKind::group, NodeKind::call);
  std::sort(entries_.begin(), entries_.end(),
            [](const OperatorInfo& a, const OperatorInfo& b) { return a.name < b.name; });
}

const OperatorRegistry& OperatorRegistry::instance() {
  static const OperatorRegistry reg;
  return reg;
}

const OperatorInfo* OperatorRegistry::find(const std::string& name) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), name,
      [](const OperatorInfo& e, const std::string& n) { return e.name < n; });
  if (it == entries_.end() || it->name != name) return nullptr;
  return &*it;
}

const OperatorInfo& OperatorRegistry::at(const std::string& name) const {
  const OperatorInfo* info = find(name);
  if (!info) {
    throw DataError("unknown operator: " + name);
  }
  return *info;
}

}  // namespace alphadesk::dsl
