#include "alphadesk/miner/mine.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/common/parallel.hpp"
#include "alphadesk/common/rng.hpp"
#include "alphadesk/dsl/parser.hpp"
#include "alphadesk/dsl/registry.hpp"
#include "alphadesk/miner/generate.hpp"

namespace alphadesk::miner {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

FitnessKind kind_or_throw(const std::string& name) {
  if (name == "icir") return FitnessKind::icir;
  if (name == "ic_mean") return FitnessKind::ic_mean;
  if (name == "sharpe") return FitnessKind::sharpe;
  throw ConfigError("miner: unknown fitness statistic: " + name);
}

double pick_fitness(FitnessKind kind, const metrics::FactorReport& report) {
  switch (kind) {
    case FitnessKind::icir:
      return report.icir;
    case FitnessKind::ic_mean:
      return report.ic_mean;
    case FitnessKind::sharpe:
      return report.sharpe;
  }
  throw InternalError("miner: unhandled fitness kind");
}

struct Member {
  dsl::ExprPtr expr;
  int birth = 0;
};

struct Scored {
  std::string text;
  double fitness = kNegInf;  // NaN reports collapse to -inf for ordering
  metrics::FactorReport report;
};

// Total order used for elites, tournaments, and the final listing: better
// fitness first, then canonical text, then population slot.
bool beats(const Scored& a, std::size_t slot_a, const Scored& b,
           std::size_t slot_b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.text != b.text) return a.text < b.text;
  return slot_a < slot_b;
}

std::string fmt_progress(double v) {
  return std::isfinite(v) ? format_double(v) : "NA";
}

}  // namespace

FitnessKind fitness_from_string(const std::string& name) {
  return kind_or_throw(name);
}

std::string fitness_to_string(FitnessKind kind) {
  switch (kind) {
    case FitnessKind::icir:
      return "icir";
    case FitnessKind::ic_mean:
      return "ic_mean";
    case FitnessKind::sharpe:
      return "sharpe";
  }
  throw InternalError("miner: unhandled fitness kind");
}

void validate_config(const MinerConfig& config) {
  if (config.population_size < 2) {
    throw ConfigError("miner: population_size must be >= 2");
  }
  if (config.generations < 1) {
    throw ConfigError("miner: generations must be >= 1");
  }
  if (config.tournament_size < 1) {
    throw ConfigError("miner: tournament_size must be >= 1");
  }
  if (!(config.p_mutation >= 0.0) || !(config.p_crossover >= 0.0) ||
      !(config.p_mutation + config.p_crossover <= 1.0)) {
    throw ConfigError(
        "miner: p_mutation and p_crossover must be nonnegative and sum to at "
        "most 1");
  }
  if (config.max_depth < 1) throw ConfigError("miner: max_depth must be >= 1");
  if (config.max_nodes < 1) throw ConfigError("miner: max_nodes must be >= 1");
  if (!(config.redundancy_threshold > 0.0 &&
        config.redundancy_threshold <= 1.0)) {
    throw ConfigError("miner: redundancy_threshold must be in (0, 1]");
  }
  if (config.operators.empty()) {
    throw ConfigError("miner: operator whitelist is empty");
  }
  if (config.fields.empty()) {
    throw ConfigError("miner: meta-field whitelist is empty");
  }
  for (const std::string& name : config.operators) {
    if (dsl::OperatorRegistry::instance().find(name) == nullptr) {
      throw ConfigError("miner: unknown operator in whitelist: " + name);
    }
  }
}

std::vector<Candidate> mine(const panel::PanelFrame& panel,
                            const metrics::ForwardReturns& fwd,
                            const std::vector<dsl::FactorMatrix>& base,
                            const MinerConfig& config, int workers) {
  validate_config(config);
  if (fwd.surface.dates != panel.dates ||
      fwd.surface.instruments != panel.instruments) {
    throw DataError("alignment error: forward returns on different axes than "
                    "the panel");
  }
  for (const std::string& field : config.fields) {
    if (std::find(panel.fields.begin(), panel.fields.end(), field) ==
        panel.fields.end()) {
      throw DataError("miner: whitelisted field not in panel: " + field);
    }
  }

  // Fitness lives on the validation sub-range: the last quarter of the dates.
  std::size_t nd = panel.dates.size();
  std::size_t n_valid = std::max<std::size_t>(1, nd / 4);
  if (nd == 0) throw DataError("miner: panel has no dates");
  std::size_t vbegin = nd - n_valid;
  std::size_t scoreable = 0;
  for (std::size_t d = vbegin; d < nd; ++d) {
    std::size_t cells = 0;
    for (std::size_t i = 0; i < fwd.surface.n_instruments(); ++i) {
      if (fwd.surface.observed(d, i)) ++cells;
    }
    if (cells >= 3) ++scoreable;
  }
  if (scoreable == 0) {
    throw DataError(
        "miner: zero evaluable dates in the validation range (no date has 3 "
        "forward returns)");
  }
  metrics::ForwardReturns fwd_valid;
  fwd_valid.horizon = fwd.horizon;
  fwd_valid.surface = dsl::slice_dates(fwd.surface, vbegin, nd);

  auto pop_size = static_cast<std::size_t>(config.population_size);
  dsl::EvalOptions eval_opts{static_cast<std::size_t>(config.max_depth),
                             static_cast<std::size_t>(config.max_nodes)};
  metrics::ReportSpec report_spec;  // defaults: spearman, q=0.1, no cost

  RngStream root = RngStream(config.seed).derive("miner");
  std::vector<Member> population(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    RngStream rng = root.derive("init").derive(static_cast<std::uint64_t>(i));
    population[i] = {random_expr(config, rng), 0};
  }

  std::vector<Scored> scored(pop_size);
  std::vector<dsl::FactorMatrix> surfaces(pop_size);
  std::vector<std::exception_ptr> failures(pop_size);
  for (int gen = 0; gen < config.generations; ++gen) {
    parallel_for(pop_size, workers, [&](std::size_t i) {
      try {
        surfaces[i] = dsl::evaluate(population[i].expr, panel, eval_opts);
        dsl::FactorMatrix valid = dsl::slice_dates(surfaces[i], vbegin, nd);
        Scored s;
        s.text = dsl::print(population[i].expr);
        s.report = metrics::build_report(valid, fwd_valid, {}, report_spec);
        double f = pick_fitness(config.fitness, s.report);
        s.fitness = std::isfinite(f) ? f : kNegInf;
        scored[i] = std::move(s);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    });
    for (std::size_t i = 0; i < pop_size; ++i) {
      if (failures[i]) std::rethrow_exception(failures[i]);
    }

    std::size_t best = 0;
    double sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t i = 0; i < pop_size; ++i) {
      if (beats(scored[i], i, scored[best], best)) best = i;
      if (std::isfinite(scored[i].fitness)) {
        sum += scored[i].fitness;
        ++finite;
      }
    }
    double best_fitness =
        std::isfinite(scored[best].fitness) ? scored[best].fitness : nan_value();
    double mean_fitness =
        finite > 0 ? sum / static_cast<double>(finite) : nan_value();
    std::fprintf(stderr, "%d,%s,%s\n", gen, fmt_progress(best_fitness).c_str(),
                 fmt_progress(mean_fitness).c_str());
    if (gen + 1 == config.generations) break;

    // Tournament selection over the current scores; draws come from the
    // per-slot stream so the winner is independent of evaluation order.
    auto tournament = [&](RngStream& rng) -> std::size_t {
      std::size_t winner = rng.uniform_int(pop_size);
      for (int t = 1; t < config.tournament_size; ++t) {
        std::size_t i = rng.uniform_int(pop_size);
        if (beats(scored[i], i, scored[winner], winner)) winner = i;
      }
      return winner;
    };

    std::vector<Member> next;
    next.reserve(pop_size);
    next.push_back(population[best]);  // elitism of exactly 1
    while (next.size() < pop_size) {
      RngStream rng = root.derive("gen")
                          .derive(static_cast<std::uint64_t>(gen))
                          .derive(static_cast<std::uint64_t>(next.size()));
      double r = rng.uniform01();
      if (r < config.p_crossover) {
        std::size_t pa = tournament(rng);
        std::size_t pb = tournament(rng);
        VariationResult res = crossover(population[pa].expr,
                                        population[pb].expr, config, rng);
        int ba = res.changed ? gen + 1 : population[pa].birth;
        int bb = res.changed ? gen + 1 : population[pb].birth;
        next.push_back({res.first, ba});
        if (next.size() < pop_size) next.push_back({res.second, bb});
      } else if (r < config.p_crossover + config.p_mutation) {
        std::size_t pa = tournament(rng);
        VariationResult res = mutate(population[pa].expr, config, rng);
        next.push_back({res.first, res.changed ? gen + 1 : population[pa].birth});
      } else {
        std::size_t pa = tournament(rng);
        next.push_back(population[pa]);
      }
    }
    population = std::move(next);
  }

  // Final listing: dedupe on canonical text, filter, and order by
  // (fitness desc, text asc). Redundancy is pooled over the full date range
  // against the base snapshot plus everything already accepted.
  std::vector<std::size_t> order(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return beats(scored[a], a, scored[b], b);
  });

  std::vector<Candidate> accepted;
  std::vector<dsl::FactorMatrix> accepted_surfaces;
  std::set<std::string> seen;
  for (std::size_t i : order) {
    const Scored& s = scored[i];
    if (!std::isfinite(s.fitness) || s.fitness < config.min_fitness) continue;
    if (!seen.insert(s.text).second) continue;
    double to_base = metrics::redundancy(surfaces[i], base);
    double to_accepted = metrics::redundancy(surfaces[i], accepted_surfaces);
    if (std::max(to_base, to_accepted) > config.redundancy_threshold) continue;
    Candidate c;
    c.expr = population[i].expr;
    c.fitness = s.fitness;
    c.report = s.report;
    c.report.max_abs_corr_to_base = to_base;
    c.birth_generation = population[i].birth;
    accepted.push_back(std::move(c));
    accepted_surfaces.push_back(surfaces[i]);
  }
  return accepted;
}

}  // namespace alphadesk::miner
