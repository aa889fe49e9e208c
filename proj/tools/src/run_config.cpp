#include "run_config.hpp"

#include <algorithm>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/io.hpp"
#include "alphadesk/common/num.hpp"

namespace alphadesk::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys{
      "backtest.cost_rate",
      "backtest.factor",
      "backtest.horizon",
      "backtest.ic_method",
      "backtest.periods_per_year",
      "backtest.quantile",
      "backtest.rebalance_every",
      "backtest.rule",
      "factorbase.path",
      "miner.fields",
      "miner.fitness",
      "miner.generations",
      "miner.max_depth",
      "miner.max_nodes",
      "miner.min_fitness",
      "miner.operators",
      "miner.p_crossover",
      "miner.p_mutation",
      "miner.population_size",
      "miner.redundancy_threshold",
      "miner.tournament_size",
      "out_dir",
      "panel.path",
      "panel.price_field",
      "portfolio.budget",
      "portfolio.c1",
      "portfolio.c2",
      "portfolio.c3",
      "portfolio.delta",
      "portfolio.lookback",
      "preprocess.fields",
      "preprocess.impute",
      "preprocess.max_gap",
      "preprocess.standardize",
      "preprocess.winsorize",
      "report.svg",
      "seed",
      "workers",
  };
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value,
                    const std::string& where) {
  const std::vector<std::string>& keys = known_keys();
  if (!std::binary_search(keys.begin(), keys.end(), key)) {
    throw ConfigError("unknown config key '" + key + "' (" + where + ")");
  }
  values_[key] = value;
}

RunConfig RunConfig::from_file(const std::string& path) {
  RunConfig cfg;
  std::vector<std::string> lines = split_lines(read_file(path));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = lines[n];
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(n + 1);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line is not key=value (" + where + ")");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty config key (" + where + ")");
    if (cfg.values_.count(key) != 0) {
      throw ConfigError("duplicate config key '" + key + "' (" + where + ")");
    }
    cfg.set(key, value, where);
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& keyval) {
  std::size_t eq = keyval.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--set expects key=value, got '" + keyval + "'");
  }
  std::string key = trim(keyval.substr(0, eq));
  std::string value = trim(keyval.substr(eq + 1));
  if (key.empty()) throw ConfigError("--set has an empty key");
  set(key, value, "--set");
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string RunConfig::str(const std::string& key,
                           const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) {
    throw ConfigError("missing required config key '" + key + "'");
  }
  return it->second;
}

int RunConfig::integer(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_int(it->second);
  if (!v) {
    throw ConfigError("config key '" + key + "' is not an integer: " +
                      it->second);
  }
  return static_cast<int>(*v);
}

double RunConfig::real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_double(it->second);
  if (!v) {
    throw ConfigError("config key '" + key + "' is not a number: " +
                      it->second);
  }
  return *v;
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " +
                    it->second);
}

std::uint64_t RunConfig::seed() const {
  auto it = values_.find("seed");
  if (it == values_.end()) return 0;
  auto v = parse_int(it->second);
  if (!v || *v < 0) {
    throw ConfigError("config key 'seed' is not a nonnegative integer: " +
                      it->second);
  }
  return static_cast<std::uint64_t>(*v);
}

std::vector<std::string> RunConfig::list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  for (const std::string& part : split_list(it->second, ',')) {
    std::string item = trim(part);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace alphadesk::cli
