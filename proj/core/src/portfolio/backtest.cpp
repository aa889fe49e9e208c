#include "alphadesk/portfolio/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/common/stats.hpp"
#include "alphadesk/portfolio/covariance.hpp"
#include "alphadesk/portfolio/solver.hpp"

namespace alphadesk::portfolio {

namespace {

void validate(const BacktestConfig& c) {
  if (c.rebalance_every < 1) {
    throw ConfigError("backtest: rebalance_every must be >= 1");
  }
  if (c.horizon < 1) throw ConfigError("backtest: horizon must be >= 1");
  if (!(c.quantile > 0.0 && c.quantile <= 0.5)) {
    throw ConfigError("backtest: quantile must be in (0, 0.5]");
  }
  if (!(c.cost_rate >= 0.0)) {
    throw ConfigError("backtest: cost_rate must be nonnegative");
  }
  if (c.periods_per_year < 1) {
    throw ConfigError("backtest: periods_per_year must be >= 1");
  }
  if (c.rule == WeightRule::optimizer) {
    if (c.lookback < 2) throw ConfigError("backtest: lookback must be >= 2");
    if (!(c.shrinkage >= 0.0 && c.shrinkage <= 1.0)) {
      throw ConfigError("backtest: shrinkage must be in [0, 1]");
    }
  }
}

// Trailing one-period returns: row d holds p(d)/p(d-1) - 1, the return
// realized entering date d. Row 0 has no predecessor and stays masked. This
// is the one-period forward surface shifted down a row, so the masking rules
// (missing or near-zero base price) match exactly.
dsl::FactorMatrix backward_returns(const dsl::FactorMatrix& fwd1) {
  dsl::FactorMatrix br = dsl::make_matrix(fwd1.dates, fwd1.instruments);
  for (std::size_t d = 1; d < br.n_dates(); ++d) {
    for (std::size_t i = 0; i < br.n_instruments(); ++i) {
      if (fwd1.observed(d - 1, i)) {
        br.values[br.index(d, i)] = fwd1.at(d - 1, i);
        br.mask[br.index(d, i)] = 1;
      }
    }
  }
  return br;
}

// Mean-variance weights over the scored universe at date d, covariance from
// the trailing `lookback` rows of `br` ending at d. Returns false (book
// untouched) when the universe is empty or the trailing window would reach
// past the start of the data; solver errors propagate.
bool optimizer_weights(const dsl::FactorMatrix& scores,
                       const dsl::FactorMatrix& br, std::size_t d,
                       const std::vector<std::size_t>& universe,
                       const std::vector<double>& prev,
                       const BacktestConfig& config,
                       std::vector<double>& weights) {
  auto lb = static_cast<std::size_t>(config.lookback);
  // Row 0 of br is structurally masked, so the earliest full window ends at
  // date lb (rows 1..lb).
  if (universe.empty() || d < lb) return false;

  std::size_t nu = universe.size();
  std::vector<std::string> wdates(scores.dates.begin() + (d - lb + 1),
                                  scores.dates.begin() + d + 1);
  std::vector<std::string> window_names;
  window_names.reserve(nu);
  for (std::size_t j = 0; j < nu; ++j) {
    window_names.push_back(scores.instruments[universe[j]]);
  }
  dsl::FactorMatrix window = dsl::make_matrix(wdates, window_names);
  for (std::size_t r = 0; r < lb; ++r) {
    std::size_t src = d - lb + 1 + r;
    for (std::size_t j = 0; j < nu; ++j) {
      if (br.observed(src, universe[j])) {
        window.values[window.index(r, j)] = br.at(src, universe[j]);
        window.mask[window.index(r, j)] = 1;
      }
    }
  }

  QpSpec spec;
  spec.sigma = estimate_covariance(window, config.shrinkage);
  spec.expected_returns.resize(static_cast<Eigen::Index>(nu));
  spec.prev_weights.resize(static_cast<Eigen::Index>(nu));
  for (std::size_t j = 0; j < nu; ++j) {
    spec.expected_returns[static_cast<Eigen::Index>(j)] =
        scores.at(d, universe[j]);
    spec.prev_weights[static_cast<Eigen::Index>(j)] = prev[universe[j]];
  }
  spec.risk_cap = config.risk_cap;
  spec.turnover_cap = config.turnover_cap;
  spec.weight_cap = config.weight_cap;
  spec.budget_sum_to_one = config.budget_sum_to_one;
  spec.aggregate_turnover = config.aggregate_turnover;

  Eigen::VectorXd w = solve_weights(spec);
  // Holdings outside the scored universe are closed at the rebalance; the
  // turnover caps govern the optimized names only.
  std::fill(weights.begin(), weights.end(), 0.0);
  for (std::size_t j = 0; j < nu; ++j) {
    weights[universe[j]] = w[static_cast<Eigen::Index>(j)];
  }
  return true;
}

}  // namespace

BacktestResult run_backtest(const dsl::FactorMatrix& scores,
                            const panel::PanelFrame& panel,
                            const BacktestConfig& config) {
  validate(config);
  if (scores.dates != panel.dates || scores.instruments != panel.instruments) {
    throw DataError("backtest: scores are not aligned with the panel axes");
  }

  metrics::ForwardReturns fwd1 =
      metrics::forward_returns(panel, config.price_field, 1);
  metrics::ForwardReturns fwdh =
      config.horizon == 1
          ? fwd1
          : metrics::forward_returns(panel, config.price_field, config.horizon);

  std::size_t nd = scores.n_dates(), ni = scores.n_instruments();
  BacktestResult out;
  out.dates = scores.dates;
  out.weights = make_weight_series(scores.dates, scores.instruments);
  out.period_returns.dates = scores.dates;
  out.period_returns.values.assign(nd, nan_value());
  out.period_returns.mask.assign(nd, 0);

  dsl::FactorMatrix br;
  if (config.rule == WeightRule::optimizer) {
    br = backward_returns(fwd1.surface);
  }

  std::vector<double> prev(ni, 0.0), cur(ni, 0.0);
  std::vector<std::size_t> universe;
  std::vector<double> rebalance_turnovers;
  auto every = static_cast<std::size_t>(config.rebalance_every);
  for (std::size_t d = 0; d < nd; ++d) {
    cur = prev;
    // The final date has no holding period, so nothing is traded there.
    bool rebalance = d % every == 0 && d + 1 < nd;
    if (rebalance) {
      universe.clear();
      for (std::size_t i = 0; i < ni; ++i) {
        if (scores.observed(d, i)) universe.push_back(i);
      }
      bool traded =
          config.rule == WeightRule::quantile
              ? metrics::longshort_weights(scores, d, universe,
                                           config.quantile, cur)
              : optimizer_weights(scores, br, d, universe, prev, config, cur);
      if (traded) {
        double tw = 0.0;
        for (std::size_t i = 0; i < ni; ++i) tw += std::abs(cur[i] - prev[i]);
        rebalance_turnovers.push_back(0.5 * tw);
      } else {
        out.skipped_rebalances.push_back(scores.dates[d]);
      }
    }

    for (std::size_t i = 0; i < ni; ++i) {
      out.weights.weights[out.weights.index(d, i)] = cur[i];
    }
    if (d + 1 < nd) {
      // Names in the book without an observed next price accrue nothing.
      double gross = 0.0, tw = 0.0;
      for (std::size_t i = 0; i < ni; ++i) {
        if (cur[i] != 0.0 && fwd1.surface.observed(d, i)) {
          gross += cur[i] * fwd1.surface.at(d, i);
        }
        tw += std::abs(cur[i] - prev[i]);
      }
      out.period_returns.values[d] = gross - config.cost_rate * 0.5 * tw;
      out.period_returns.mask[d] = 1;
    }
    prev = cur;
  }

  out.equity.assign(nd, 1.0);
  for (std::size_t d = 1; d < nd; ++d) {
    double r = out.period_returns.mask[d - 1] ? out.period_returns.values[d - 1]
                                              : 0.0;
    out.equity[d] = out.equity[d - 1] * (1.0 + r);
  }

  // The report's IC columns come from the scores against the configured
  // horizon; the portfolio columns come from the realized backtest path.
  metrics::FactorReport& rep = out.report;
  rep.ic_series =
      metrics::information_coefficient(scores, fwdh, config.ic_method);
  std::vector<double> ics;
  for (std::size_t d = 0; d < rep.ic_series.values.size(); ++d) {
    if (rep.ic_series.mask[d]) ics.push_back(rep.ic_series.values[d]);
  }
  rep.n_dates_evaluated = ics.size();
  rep.ic_mean = ics.empty() ? nan_value() : mean(ics);
  rep.ic_std = ics.size() >= 2 ? sample_std(ics) : nan_value();
  if (std::isfinite(rep.ic_mean) && std::isfinite(rep.ic_std)) {
    rep.icir = rep.ic_std > 0.0 ? rep.ic_mean / rep.ic_std : 0.0;
  } else {
    rep.icir = nan_value();
  }
  std::vector<double> rets;
  for (std::size_t d = 0; d < nd; ++d) {
    if (out.period_returns.mask[d]) rets.push_back(out.period_returns.values[d]);
  }
  rep.annualized_return =
      rets.empty() ? nan_value()
                   : mean(rets) * static_cast<double>(config.periods_per_year);
  if (rets.size() >= 2 && sample_std(rets) > 0.0) {
    rep.sharpe = metrics::sharpe(rets, config.periods_per_year);
  } else {
    rep.sharpe = nan_value();
  }
  rep.max_drawdown = metrics::max_drawdown(rets);
  rep.avg_turnover = rebalance_turnovers.empty() ? nan_value()
                                                 : mean(rebalance_turnovers);
  rep.max_abs_corr_to_base = metrics::redundancy(scores, {});
  return out;
}

BacktestResult run_backtest(const dsl::ExprPtr& expr,
                            const panel::PanelFrame& panel,
                            const BacktestConfig& config) {
  return run_backtest(dsl::evaluate(expr, panel), panel, config);
}

}  // namespace alphadesk::portfolio
