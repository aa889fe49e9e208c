// alphadesk: panel ingestion, factor mining, backtesting, reporting, and
// factorbase scheduling behind one binary. Every knob lives in the key=value
// config file; --set overrides individual keys for one run.
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alphadesk/common/error.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;   // empty: fall back to the config's out_dir key
  int workers = 0;       // 0: fall back to the config's workers key
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")->required();
  cmd->add_option("--set", args.overrides, "override one config key (key=value)");
  cmd->add_option("--out", args.out_dir, "output directory (default: out_dir key)");
  cmd->add_option("--workers", args.workers, "worker threads (default: workers key)");
}

alphadesk::cli::RunConfig load_config(const CommonArgs& args) {
  auto cfg = alphadesk::cli::RunConfig::from_file(args.config_path);
  for (const std::string& keyval : args.overrides) cfg.apply_override(keyval);
  return cfg;
}

std::string resolve_out(const CommonArgs& args, const alphadesk::cli::RunConfig& cfg) {
  return args.out_dir.empty() ? cfg.str("out_dir", "out") : args.out_dir;
}

int resolve_workers(const CommonArgs& args, const alphadesk::cli::RunConfig& cfg) {
  return args.workers > 0 ? args.workers : cfg.integer("workers", 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alphadesk quantitative research engine"};
  app.require_subcommand(1);

  CommonArgs ingest_args;
  CLI::App* ingest = app.add_subcommand("ingest", "load, clean, and emit the panel");
  add_common(ingest, ingest_args);

  CommonArgs mine_args;
  CLI::App* mine = app.add_subcommand("mine", "search for candidate factors");
  add_common(mine, mine_args);

  CommonArgs backtest_args;
  CLI::App* backtest = app.add_subcommand("backtest", "simulate one factor's book");
  add_common(backtest, backtest_args);

  CommonArgs report_args;
  CLI::App* report = app.add_subcommand("report", "assemble run outputs into a report");
  add_common(report, report_args);

  CommonArgs schedule_args;
  std::vector<std::string> schedule_targets;
  CLI::App* schedule =
      app.add_subcommand("schedule", "print factor ids in dependency order");
  add_common(schedule, schedule_args);
  schedule->add_option("targets", schedule_targets,
                       "factor ids to schedule (default: all records)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest) {
      const auto cfg = load_config(ingest_args);
      alphadesk::cli::cmd_ingest(cfg, resolve_out(ingest_args, cfg));
    } else if (*mine) {
      const auto cfg = load_config(mine_args);
      alphadesk::cli::cmd_mine(cfg, resolve_out(mine_args, cfg),
                               resolve_workers(mine_args, cfg));
    } else if (*backtest) {
      const auto cfg = load_config(backtest_args);
      alphadesk::cli::cmd_backtest(cfg, resolve_out(backtest_args, cfg));
    } else if (*report) {
      const auto cfg = load_config(report_args);
      alphadesk::cli::cmd_report(cfg, resolve_out(report_args, cfg));
    } else if (*schedule) {
      const auto cfg = load_config(schedule_args);
      alphadesk::cli::cmd_schedule(cfg, schedule_targets);
    }
  } catch (const alphadesk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
