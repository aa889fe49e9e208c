#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace alphadesk::miner {

// The statistic of the validation-range report that drives selection.
enum class FitnessKind { icir, ic_mean, sharpe };

FitnessKind fitness_from_string(const std::string& name);
std::string fitness_to_string(FitnessKind kind);

struct MinerConfig {
  std::uint64_t seed = 0;
  int population_size = 100;
  int generations = 10;
  int tournament_size = 3;
  double p_mutation = 0.3;
  double p_crossover = 0.6;  // remainder is plain reproduction
  int max_depth = 8;
  int max_nodes = 64;
  FitnessKind fitness = FitnessKind::icir;
  double min_fitness = 0.0;
  double redundancy_threshold = 0.9;  // in (0, 1]
  std::vector<std::string> operators;  // operator whitelist
  std::vector<std::string> fields;     // meta-field whitelist
};

// Throws ConfigError on out-of-range knobs, empty whitelists, or operator
// names missing from the registry.
void validate_config(const MinerConfig& config);

}  // namespace alphadesk::miner
