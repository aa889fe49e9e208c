#pragma once

#include "alphadesk/common/rng.hpp"
#include "alphadesk/dsl/expr.hpp"
#include "alphadesk/miner/config.hpp"

namespace alphadesk::miner {

// Random tree by recursive descent: the terminal probability grows linearly
// with depth and reaches 1 at max_depth, and the node budget is split across
// children, so every draw respects both caps by construction. Terminals are
// whitelisted meta fields (mostly) or small two-decimal constants.
dsl::ExprPtr random_expr(const MinerConfig& config, RngStream& rng);

// Result of one variation step. `changed` is false when the retry budget
// (8 attempts) ran out and the inputs were passed through unchanged.
struct VariationResult {
  dsl::ExprPtr first;
  dsl::ExprPtr second;  // crossover's second child; null for mutate
  bool changed = false;
};

// Replaces one uniformly chosen node with a fresh subtree generated inside
// the remaining depth/node budget at that position.
VariationResult mutate(const dsl::ExprPtr& expr, const MinerConfig& config,
                       RngStream& rng);

// Swaps uniformly chosen subtrees between the parents. The grammar is
// single-sorted (every subtree is a surface expression), so compatibility
// reduces to the depth/node caps; offending swap points are resampled.
VariationResult crossover(const dsl::ExprPtr& a, const dsl::ExprPtr& b,
                          const MinerConfig& config, RngStream& rng);

}  // namespace alphadesk::miner
