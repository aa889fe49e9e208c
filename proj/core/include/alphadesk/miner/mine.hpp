#pragma once

#include <vector>

#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/dsl/expr.hpp"
#include "alphadesk/metrics/metrics.hpp"
#include "alphadesk/metrics/report.hpp"
#include "alphadesk/miner/config.hpp"
#include "alphadesk/panel/panel.hpp"

namespace alphadesk::miner {

struct Candidate {
  dsl::ExprPtr expr;
  double fitness = 0.0;  // the configured statistic of `report`
  metrics::FactorReport report;  // built on the validation date range
  int birth_generation = 0;
};

// Genetic-programming search over the whitelisted operator/field space.
//
// Fitness is the configured statistic over the validation sub-range (the
// last quarter of the dates), which also hosts the min_fitness filter, so
// selection never sees pure in-sample numbers. Each generation: evaluate the
// population (a pure parallel map; per-(generation, slot) RNG streams keep
// the run byte-identical for any worker count), carry the single best member
// forward unchanged, and fill the rest by tournament-selected crossover,
// mutation, or reproduction. The final population is deduplicated by
// canonical text, filtered to fitness >= min_fitness and full-range
// redundancy <= redundancy_threshold against base factors plus already
// accepted candidates, and sorted by (fitness desc, canonical text asc).
// `report.max_abs_corr_to_base` on each candidate holds the full-range
// redundancy against `base` only.
//
// Progress lines `generation,best_fitness,mean_fitness` go to stderr.
// Throws DataError when the validation range has no date with enough forward
// returns to ever score an IC.
std::vector<Candidate> mine(const panel::PanelFrame& panel,
                            const metrics::ForwardReturns& fwd,
                            const std::vector<dsl::FactorMatrix>& base,
                            const MinerConfig& config, int workers = 1);

}  // namespace alphadesk::miner
