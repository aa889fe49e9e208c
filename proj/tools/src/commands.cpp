#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/io.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/dsl/parser.hpp"
#include "alphadesk/dsl/registry.hpp"
#include "alphadesk/factorbase/factorbase.hpp"
#include "alphadesk/metrics/metrics.hpp"
#include "alphadesk/metrics/report.hpp"
#include "alphadesk/miner/mine.hpp"
#include "alphadesk/panel/panel.hpp"
#include "alphadesk/portfolio/backtest.hpp"
#include "svg.hpp"

namespace alphadesk::cli {
namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// NA for anything non-finite so every output column is parseable without a
// locale or a NaN spelling convention.
std::string num_or_na(double v) {
  return std::isfinite(v) ? alphadesk::format_double(v) : std::string("NA");
}

panel::PreprocessSpec preprocess_spec(const RunConfig& cfg) {
  panel::PreprocessSpec spec;
  const std::string impute = cfg.str("preprocess.impute", "none");
  if (impute == "none") {
    spec.impute = panel::PreprocessSpec::Impute::none;
  } else if (impute == "forward_fill") {
    spec.impute = panel::PreprocessSpec::Impute::forward_fill;
  } else {
    throw alphadesk::ConfigError("preprocess.impute must be 'none' or 'forward_fill', got '" +
                              impute + "'");
  }
  spec.max_gap = cfg.integer("preprocess.max_gap", 0);
  spec.winsorize_p = cfg.real("preprocess.winsorize", 0.0);
  const std::string standardize = cfg.str("preprocess.standardize", "none");
  if (standardize == "none") {
    spec.standardize = panel::PreprocessSpec::Standardize::none;
  } else if (standardize == "zscore") {
    spec.standardize = panel::PreprocessSpec::Standardize::zscore_cross_section;
  } else {
    throw alphadesk::ConfigError("preprocess.standardize must be 'none' or 'zscore', got '" +
                              standardize + "'");
  }
  return spec;
}

panel::PanelFrame load_and_preprocess(const RunConfig& cfg) {
  panel::PanelFrame raw = panel::load_panel(cfg.require("panel.path"));
  const std::vector<std::string> fields = cfg.list("preprocess.fields", raw.fields);
  return panel::preprocess(raw, preprocess_spec(cfg), fields);
}

metrics::IcMethod ic_method(const RunConfig& cfg) {
  const std::string name = cfg.str("backtest.ic_method", "spearman");
  if (name == "spearman") return metrics::IcMethod::spearman;
  if (name == "pearson") return metrics::IcMethod::pearson;
  throw alphadesk::ConfigError("backtest.ic_method must be 'spearman' or 'pearson', got '" +
                            name + "'");
}

// Active factorbase records evaluated on the panel; the redundancy base for
// mining. Evaluation errors propagate: a base that no longer evaluates is a
// data problem, not something to paper over.
std::vector<dsl::FactorMatrix> base_surfaces(const factorbase::FactorBase& fb,
                                             const panel::PanelFrame& panel) {
  std::vector<dsl::FactorMatrix> base;
  for (const auto& record : fb.records()) {
    if (record.status != "active") continue;
    base.push_back(dsl::evaluate(dsl::parse(record.expr_text), panel));
  }
  return base;
}

}  // namespace

void cmd_ingest(const RunConfig& cfg, const std::string& out_dir) {
  const panel::PanelFrame processed = load_and_preprocess(cfg);
  fs::create_directories(out_dir);
  alphadesk::write_file_atomic(join_path(out_dir, "panel.csv"),
                            panel::panel_to_csv(processed, /*emit_na=*/true));

  std::size_t observed = 0;
  const std::size_t total = processed.mask.size();
  for (std::uint8_t m : processed.mask) observed += m ? 1 : 0;
  const double missing = total == 0 ? 0.0 : 1.0 - static_cast<double>(observed) /
                                                      static_cast<double>(total);
  std::string summary;
  summary += "dates," + std::to_string(processed.dates.size()) + "\n";
  summary += "instruments," + std::to_string(processed.instruments.size()) + "\n";
  summary += "fields," + std::to_string(processed.fields.size()) + "\n";
  summary += "missing_fraction," + alphadesk::format_double(missing) + "\n";
  alphadesk::write_file_atomic(join_path(out_dir, "ingest_summary.txt"), summary);
}

void cmd_mine(const RunConfig& cfg, const std::string& out_dir, int workers) {
  const panel::PanelFrame panel = load_and_preprocess(cfg);
  const metrics::ForwardReturns fwd =
      metrics::forward_returns(panel, cfg.str("panel.price_field", "close"),
                               cfg.integer("backtest.horizon", 1));

  miner::MinerConfig mcfg;
  mcfg.seed = cfg.seed();
  mcfg.population_size = cfg.integer("miner.population_size", mcfg.population_size);
  mcfg.generations = cfg.integer("miner.generations", mcfg.generations);
  mcfg.tournament_size = cfg.integer("miner.tournament_size", mcfg.tournament_size);
  mcfg.p_mutation = cfg.real("miner.p_mutation", mcfg.p_mutation);
  mcfg.p_crossover = cfg.real("miner.p_crossover", mcfg.p_crossover);
  mcfg.max_depth = cfg.integer("miner.max_depth", mcfg.max_depth);
  mcfg.max_nodes = cfg.integer("miner.max_nodes", mcfg.max_nodes);
  mcfg.fitness = miner::fitness_from_string(cfg.str("miner.fitness", "icir"));
  mcfg.min_fitness = cfg.real("miner.min_fitness", mcfg.min_fitness);
  mcfg.redundancy_threshold =
      cfg.real("miner.redundancy_threshold", mcfg.redundancy_threshold);
  std::vector<std::string> all_ops;
  for (const auto& info : dsl::OperatorRegistry::instance().all()) {
    all_ops.push_back(info.name);
  }
  mcfg.operators = cfg.list("miner.operators", all_ops);
  mcfg.fields = cfg.list("miner.fields", panel.fields);

  factorbase::FactorBase fb;
  const bool have_base = cfg.has("factorbase.path");
  std::string fb_path;
  if (have_base) {
    fb_path = cfg.require("factorbase.path");
    if (fs::exists(fb_path)) fb = factorbase::FactorBase::load(fb_path);
  }

  const std::vector<miner::Candidate> found =
      miner::mine(panel, fwd, base_surfaces(fb, panel), mcfg, workers);

  fs::create_directories(out_dir);
  std::string csv =
      "expr,fitness,birth_generation,n_dates,ic_mean,ic_std,icir,"
      "annualized_return,sharpe,max_drawdown,avg_turnover,max_abs_corr_to_base\n";
  for (const auto& cand : found) {
    const auto& r = cand.report;
    csv += "\"" + dsl::print(cand.expr) + "\"," + num_or_na(cand.fitness) + "," +
           std::to_string(cand.birth_generation) + "," +
           std::to_string(r.n_dates_evaluated) + "," + num_or_na(r.ic_mean) + "," +
           num_or_na(r.ic_std) + "," + num_or_na(r.icir) + "," +
           num_or_na(r.annualized_return) + "," + num_or_na(r.sharpe) + "," +
           num_or_na(r.max_drawdown) + "," + num_or_na(r.avg_turnover) + "," +
           num_or_na(r.max_abs_corr_to_base) + "\n";
  }
  alphadesk::write_file_atomic(join_path(out_dir, "candidates.csv"), csv);

  if (have_base) {
    for (const auto& cand : found) {
      const std::string text = dsl::print(cand.expr);
      const std::string id = factorbase::record_id(text);
      if (fb.find(id) != nullptr) {
        std::fprintf(stderr, "note: %s already in factorbase, skipping\n", id.c_str());
        continue;
      }
      fb.commit(factorbase::make_record(text, "mined_" + id.substr(0, 12), cand.report));
    }
    fb.save(fb_path);
  }
}

void cmd_backtest(const RunConfig& cfg, const std::string& out_dir) {
  const panel::PanelFrame panel = load_and_preprocess(cfg);
  const std::string factor_text = cfg.require("backtest.factor");
  const dsl::ExprPtr expr = dsl::parse(factor_text);

  portfolio::BacktestConfig bt;
  const std::string rule = cfg.str("backtest.rule", "quantile");
  if (rule == "quantile") {
    bt.rule = portfolio::WeightRule::quantile;
  } else if (rule == "optimizer") {
    bt.rule = portfolio::WeightRule::optimizer;
  } else {
    throw alphadesk::ConfigError("backtest.rule must be 'quantile' or 'optimizer', got '" +
                              rule + "'");
  }
  bt.price_field = cfg.str("panel.price_field", bt.price_field);
  bt.horizon = cfg.integer("backtest.horizon", bt.horizon);
  bt.rebalance_every = cfg.integer("backtest.rebalance_every", bt.rebalance_every);
  bt.quantile = cfg.real("backtest.quantile", bt.quantile);
  bt.cost_rate = cfg.real("backtest.cost_rate", bt.cost_rate);
  bt.periods_per_year = cfg.integer("backtest.periods_per_year", bt.periods_per_year);
  bt.ic_method = ic_method(cfg);
  bt.risk_cap = cfg.real("portfolio.c1", bt.risk_cap);
  bt.turnover_cap = cfg.real("portfolio.c2", bt.turnover_cap);
  bt.weight_cap = cfg.real("portfolio.c3", bt.weight_cap);
  bt.budget_sum_to_one = cfg.flag("portfolio.budget", bt.budget_sum_to_one);
  bt.shrinkage = cfg.real("portfolio.delta", bt.shrinkage);
  bt.lookback = cfg.integer("portfolio.lookback", bt.lookback);

  const portfolio::BacktestResult result = portfolio::run_backtest(expr, panel, bt);

  fs::create_directories(out_dir);
  std::string equity_csv = "date,equity\n";
  for (std::size_t d = 0; d < result.dates.size(); ++d) {
    equity_csv += result.dates[d] + "," + alphadesk::format_double(result.equity[d]) + "\n";
  }
  alphadesk::write_file_atomic(join_path(out_dir, "equity.csv"), equity_csv);

  std::string weights_csv = "date,instrument,weight\n";
  for (std::size_t d = 0; d < result.weights.dates.size(); ++d) {
    for (std::size_t i = 0; i < result.weights.instruments.size(); ++i) {
      weights_csv += result.weights.dates[d] + "," + result.weights.instruments[i] +
                     "," +
                     alphadesk::format_double(
                         result.weights.weights[d * result.weights.instruments.size() + i]) +
                     "\n";
    }
  }
  alphadesk::write_file_atomic(join_path(out_dir, "weights.csv"), weights_csv);

  const std::string quoted = "\"" + dsl::print(expr) + "\"";
  alphadesk::write_file_atomic(join_path(out_dir, "backtest_report.csv"),
                            metrics::report_csv_header() + "\n" +
                                metrics::report_csv_row(quoted, result.report) + "\n");
  alphadesk::write_file_atomic(join_path(out_dir, "ic_series.csv"),
                            metrics::ic_series_csv(result.report.ic_series));

  std::string summary;
  summary += "factor," + dsl::print(expr) + "\n";
  summary += "dates," + std::to_string(result.dates.size()) + "\n";
  summary += "final_equity," +
             num_or_na(result.equity.empty() ? 1.0 : result.equity.back()) + "\n";
  summary += "annualized_return," + num_or_na(result.report.annualized_return) + "\n";
  summary += "sharpe," + num_or_na(result.report.sharpe) + "\n";
  summary += "max_drawdown," + num_or_na(result.report.max_drawdown) + "\n";
  summary += "avg_turnover," + num_or_na(result.report.avg_turnover) + "\n";
  summary += "skipped_rebalances," + std::to_string(result.skipped_rebalances.size()) +
             "\n";
  alphadesk::write_file_atomic(join_path(out_dir, "backtest_summary.txt"), summary);
}

void cmd_report(const RunConfig& cfg, const std::string& out_dir) {
  const std::string factor_text = cfg.require("backtest.factor");
  const std::string run_id = factorbase::record_id(dsl::print(dsl::parse(factor_text)));

  const std::string report_path = join_path(out_dir, "backtest_report.csv");
  if (!fs::exists(report_path)) {
    throw alphadesk::DataError("missing " + report_path + "; run the backtest command first");
  }
  // The report rows carry quoted expression names that may contain commas, so
  // the pass-through prepends the run id without re-parsing any row.
  const std::vector<std::string> lines = alphadesk::split_lines(alphadesk::read_file(report_path));
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    out += (i == 0 ? "run_id," : run_id + ",") + lines[i] + "\n";
  }
  fs::create_directories(out_dir);
  alphadesk::write_file_atomic(join_path(out_dir, "report.csv"), out);

  if (!cfg.flag("report.svg", false)) return;
  const auto read_series = [](const std::string& path, std::vector<double>& values,
                              std::vector<std::uint8_t>& mask) {
    if (!fs::exists(path)) {
      throw alphadesk::DataError("missing " + path + "; run the backtest command first");
    }
    const std::vector<std::string> rows = alphadesk::split_lines(alphadesk::read_file(path));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].empty()) continue;
      const std::vector<std::string> cells = alphadesk::split_csv(rows[i]);
      if (cells.size() != 2) throw alphadesk::DataError("malformed row in " + path);
      if (cells[1] == "NA") {
        values.push_back(0.0);
        mask.push_back(0);
        continue;
      }
      const auto parsed = alphadesk::parse_double(cells[1]);
      if (!parsed) throw alphadesk::DataError("malformed number in " + path);
      values.push_back(*parsed);
      mask.push_back(1);
    }
  };
  std::vector<double> equity;
  std::vector<std::uint8_t> equity_mask;
  read_series(join_path(out_dir, "equity.csv"), equity, equity_mask);
  alphadesk::write_file_atomic(join_path(out_dir, "equity.svg"),
                            line_chart("equity", equity, &equity_mask));
  std::vector<double> ic;
  std::vector<std::uint8_t> ic_mask;
  read_series(join_path(out_dir, "ic_series.csv"), ic, ic_mask);
  alphadesk::write_file_atomic(join_path(out_dir, "ic.svg"), line_chart("ic", ic, &ic_mask));
}

void cmd_schedule(const RunConfig& cfg, const std::vector<std::string>& targets) {
  const factorbase::FactorBase fb = factorbase::FactorBase::load(cfg.require("factorbase.path"));
  std::vector<std::string> wanted = targets;
  if (wanted.empty()) {
    for (const auto& record : fb.records()) wanted.push_back(record.id);
  }
  for (const std::string& id : fb.schedule(wanted)) {
    std::fprintf(stdout, "%s\n", id.c_str());
  }
}

}  // namespace alphadesk::cli
