#pragma once

#include <string>
#include <vector>

#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/dsl/expr.hpp"
#include "alphadesk/metrics/metrics.hpp"
#include "alphadesk/metrics/report.hpp"
#include "alphadesk/panel/panel.hpp"
#include "alphadesk/portfolio/weights.hpp"

namespace alphadesk::portfolio {

// How the book is formed at a rebalance date: the quantile long/short rule
// (equal weights +-1/k on the top and bottom q of the scored cross-section)
// or the constrained mean-variance program with a trailing covariance window.
enum class WeightRule { quantile, optimizer };

struct BacktestConfig {
  WeightRule rule = WeightRule::quantile;
  std::string price_field = "close";
  int horizon = 1;          // forward-return horizon for the IC columns
  int rebalance_every = 1;  // trade on every k-th date, hold in between
  double quantile = 0.1;    // quantile rule: fraction per side
  double cost_rate = 0.0;   // cost charged per unit of turnover
  int periods_per_year = 252;
  metrics::IcMethod ic_method = metrics::IcMethod::spearman;
  // Optimizer rule (config keys portfolio.c1/c2/c3/budget/delta/lookback).
  double risk_cap = 1.0;
  double turnover_cap = 1.0;
  double weight_cap = 1.0;
  bool budget_sum_to_one = false;
  bool aggregate_turnover = false;
  double shrinkage = 0.1;  // covariance shrinkage toward the scaled identity
  int lookback = 20;       // trailing return window for the covariance
};

struct BacktestResult {
  std::vector<std::string> dates;  // panel dates
  // equity[0] = 1; equity[d] = equity[d-1] * (1 + r_{d-1}). Sized like dates,
  // so the last entry folds in the final observed period return.
  std::vector<double> equity;
  // r_d for d in [0, n_dates-1): the book held on date d times the realized
  // one-period returns into d+1, minus cost_rate x turnover at d. The final
  // date has no forward period and stays masked.
  metrics::DateSeries period_returns;
  WeightSeries weights;  // the book held on each date
  metrics::FactorReport report;
  std::vector<std::string> skipped_rebalances;  // untradeable rebalance dates
};

// Walks the panel in date order. At each rebalance date the target book is
// formed from that date's score cross-section only (never from later data),
// held until the next rebalance, and accrues w . realized returns minus
// cost_rate x turnover. Rebalance dates with no tradeable cross-section
// (fewer than two scored instruments, an all-tied section, or - for the
// optimizer rule - fewer than `lookback` dates of trailing returns) keep the
// previous book and are recorded in skipped_rebalances. Scores must share the
// panel axes. Optimizer infeasibility propagates from solve_weights.
BacktestResult run_backtest(const dsl::FactorMatrix& scores,
                            const panel::PanelFrame& panel,
                            const BacktestConfig& config);

// Convenience overload: evaluates the expression over the panel first.
BacktestResult run_backtest(const dsl::ExprPtr& expr,
                            const panel::PanelFrame& panel,
                            const BacktestConfig& config);

}  // namespace alphadesk::portfolio
