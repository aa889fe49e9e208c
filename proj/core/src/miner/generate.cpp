#include "alphadesk/miner/generate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "alphadesk/common/error.hpp"
#include "alphadesk/dsl/registry.hpp"

namespace alphadesk::miner {

namespace {

constexpr int kRetries = 8;
constexpr double kConstantShare = 0.1;  // terminals draw a constant this often
const int kWindows[] = {2, 3, 5, 10, 20, 50};
const double kFractions[] = {0.01, 0.05, 0.1, 0.25};

std::vector<const dsl::OperatorInfo*> whitelisted_ops(const MinerConfig& config) {
  std::vector<const dsl::OperatorInfo*> ops;
  ops.reserve(config.operators.size());
  for (const std::string& name : config.operators) {
    const dsl::OperatorInfo* info = dsl::OperatorRegistry::instance().find(name);
    if (info == nullptr) {
      throw ConfigError("miner: unknown operator in whitelist: " + name);
    }
    ops.push_back(info);
  }
  return ops;
}

dsl::ExprPtr terminal(const MinerConfig& config, RngStream& rng) {
  if (config.fields.empty()) {
    throw ConfigError("miner: meta-field whitelist is empty");
  }
  if (rng.uniform01() < kConstantShare) {
    // Two-decimal constants keep printed genomes short.
    double v = std::floor(rng.uniform(-1.0, 1.0) * 100.0) / 100.0;
    return dsl::constant(v);
  }
  std::size_t pick = rng.uniform_int(config.fields.size());
  return dsl::meta(config.fields[pick]);
}

dsl::Param draw_param(const dsl::OperatorInfo& op, const MinerConfig& config,
                      RngStream& rng) {
  dsl::Param param;
  param.kind = op.param;
  switch (op.param) {
    case dsl::ParamKind::window:
      param.window = kWindows[rng.uniform_int(std::size(kWindows))];
      break;
    case dsl::ParamKind::group:
      param.group = config.fields[rng.uniform_int(config.fields.size())];
      break;
    case dsl::ParamKind::fraction:
      param.fraction = kFractions[rng.uniform_int(std::size(kFractions))];
      break;
    case dsl::ParamKind::none:
      break;
  }
  return param;
}

// depth_budget and node_budget are what the subtree may still spend (both
// >= 1); the terminal probability ramps from 0 at a full budget to 1 at the
// last level.
dsl::ExprPtr gen_tree(const MinerConfig& config,
                      const std::vector<const dsl::OperatorInfo*>& ops,
                      int depth_budget, int node_budget, RngStream& rng) {
  bool forced = depth_budget <= 1 || node_budget <= 1;
  if (!forced && config.max_depth > 1) {
    double p_terminal = 1.0 - static_cast<double>(depth_budget - 1) /
                                  static_cast<double>(config.max_depth - 1);
    forced = rng.uniform01() < p_terminal;
  }
  if (forced) return terminal(config, rng);

  std::vector<const dsl::OperatorInfo*> eligible;
  for (const dsl::OperatorInfo* op : ops) {
    if (1 + op->arity <= node_budget) eligible.push_back(op);
  }
  if (eligible.empty()) return terminal(config, rng);

  const dsl::OperatorInfo& op = *eligible[rng.uniform_int(eligible.size())];
  std::vector<dsl::ExprPtr> children;
  children.reserve(static_cast<std::size_t>(op.arity));
  int remaining = node_budget - 1;
  for (int c = 0; c < op.arity; ++c) {
    int reserve = op.arity - 1 - c;  // one node minimum per later sibling
    dsl::ExprPtr child =
        gen_tree(config, ops, depth_budget - 1, remaining - reserve, rng);
    remaining -= static_cast<int>(dsl::node_count(*child));
    children.push_back(std::move(child));
  }
  if (op.param == dsl::ParamKind::none) {
    return dsl::call(op.name, std::move(children));
  }
  return dsl::call(op.name, std::move(children), draw_param(op, config, rng));
}

struct NodeIndex {
  std::vector<const dsl::Expr*> nodes;  // preorder
  std::vector<int> depths;              // 1-based depth per node
  std::vector<std::size_t> sizes;       // subtree node count per node
};

std::size_t index_walk(const dsl::Expr& e, int depth, NodeIndex& out) {
  std::size_t slot = out.nodes.size();
  out.nodes.push_back(&e);
  out.depths.push_back(depth);
  out.sizes.push_back(0);
  std::size_t total = 1;
  for (const dsl::ExprPtr& c : e.children) {
    total += index_walk(*c, depth + 1, out);
  }
  out.sizes[slot] = total;
  return total;
}

NodeIndex index_nodes(const dsl::ExprPtr& e) {
  NodeIndex out;
  index_walk(*e, 1, out);
  return out;
}

dsl::ExprPtr rebuild(const dsl::Expr& e, std::vector<dsl::ExprPtr> children) {
  if (e.param.kind == dsl::ParamKind::none) {
    return dsl::call(e.name, std::move(children));
  }
  return dsl::call(e.name, std::move(children), e.param);
}

// Functional replacement of the node at preorder index `target`; `cursor`
// carries the preorder position of `e` in the original tree.
dsl::ExprPtr replace_at(const dsl::ExprPtr& e, std::size_t target,
                        std::size_t& cursor, const dsl::ExprPtr& replacement) {
  if (cursor == target) {
    cursor += dsl::node_count(*e);
    return replacement;
  }
  ++cursor;
  if (e->children.empty()) return e;
  std::vector<dsl::ExprPtr> children;
  children.reserve(e->children.size());
  bool changed = false;
  for (const dsl::ExprPtr& c : e->children) {
    dsl::ExprPtr next = replace_at(c, target, cursor, replacement);
    changed = changed || next.get() != c.get();
    children.push_back(std::move(next));
  }
  if (!changed) return e;
  return rebuild(*e, std::move(children));
}

dsl::ExprPtr subtree_at(const dsl::ExprPtr& root, std::size_t target) {
  // Walk the same preorder to hand back a shared_ptr to the chosen node.
  struct Walker {
    std::size_t cursor = 0;
    dsl::ExprPtr found;
    void walk(const dsl::ExprPtr& e, std::size_t target) {
      if (found) return;
      if (cursor == target) {
        found = e;
        return;
      }
      ++cursor;
      for (const dsl::ExprPtr& c : e->children) walk(c, target);
    }
  } w;
  w.walk(root, target);
  return w.found;
}

bool within_caps(const dsl::Expr& e, const MinerConfig& config) {
  return dsl::depth(e) <= static_cast<std::size_t>(config.max_depth) &&
         dsl::node_count(e) <= static_cast<std::size_t>(config.max_nodes);
}

}  // namespace

dsl::ExprPtr random_expr(const MinerConfig& config, RngStream& rng) {
  if (config.operators.empty()) {
    throw ConfigError("miner: operator whitelist is empty");
  }
  std::vector<const dsl::OperatorInfo*> ops = whitelisted_ops(config);
  return gen_tree(config, ops, config.max_depth, config.max_nodes, rng);
}

VariationResult mutate(const dsl::ExprPtr& expr, const MinerConfig& config,
                       RngStream& rng) {
  if (config.operators.empty()) {
    throw ConfigError("miner: operator whitelist is empty");
  }
  std::vector<const dsl::OperatorInfo*> ops = whitelisted_ops(config);
  NodeIndex idx = index_nodes(expr);
  std::size_t total = idx.nodes.size();
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    std::size_t target = rng.uniform_int(total);
    int depth_budget = config.max_depth - idx.depths[target] + 1;
    int node_budget = config.max_nodes -
                      static_cast<int>(total - idx.sizes[target]);
    if (depth_budget < 1 || node_budget < 1) continue;
    dsl::ExprPtr sub = gen_tree(config, ops, depth_budget, node_budget, rng);
    std::size_t cursor = 0;
    dsl::ExprPtr child = replace_at(expr, target, cursor, sub);
    if (within_caps(*child, config)) return {std::move(child), nullptr, true};
  }
  return {expr, nullptr, false};
}

VariationResult crossover(const dsl::ExprPtr& a, const dsl::ExprPtr& b,
                          const MinerConfig& config, RngStream& rng) {
  NodeIndex ia = index_nodes(a), ib = index_nodes(b);
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    std::size_t pa = rng.uniform_int(ia.nodes.size());
    std::size_t pb = rng.uniform_int(ib.nodes.size());
    dsl::ExprPtr sa = subtree_at(a, pa);
    dsl::ExprPtr sb = subtree_at(b, pb);
    std::size_t cursor = 0;
    dsl::ExprPtr child_a = replace_at(a, pa, cursor, sb);
    cursor = 0;
    dsl::ExprPtr child_b = replace_at(b, pb, cursor, sa);
    if (within_caps(*child_a, config) && within_caps(*child_b, config)) {
      return {std::move(child_a), std::move(child_b), true};
    }
  }
  return {a, b, false};
}

}  // namespace alphadesk::miner
