#pragma once

#include <string>
#include <vector>

#include "run_config.hpp"

namespace alphadesk::cli {

// Each command returns nothing and throws alphadesk::Error on failure; main
// maps the error taxonomy onto exit codes (1 config/data, 2 domain,
// 3 internal). `out_dir` and `workers` carry the resolved values after CLI
// flags override the config file.

void cmd_ingest(const RunConfig& cfg, const std::string& out_dir);
void cmd_mine(const RunConfig& cfg, const std::string& out_dir, int workers);
void cmd_backtest(const RunConfig& cfg, const std::string& out_dir);
void cmd_report(const RunConfig& cfg, const std::string& out_dir);
// Prints the evaluation order (one id per line) to stdout. Empty target list
// means every record in the base.
void cmd_schedule(const RunConfig& cfg, const std::vector<std::string>& targets);

}  // namespace alphadesk::cli
