#include "alphadesk/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/common/stats.hpp"

namespace alphadesk::metrics {

namespace {

void check_aligned(const FactorMatrix& a, const FactorMatrix& b,
                   const char* what) {
  if (a.dates != b.dates || a.instruments != b.instruments) {
    throw DataError(std::string("alignment error: ") + what +
                    " axes do not match");
  }
}

}  // namespace

ForwardReturns forward_returns(const panel::PanelFrame& panel,
                               const std::string& price_field, int horizon) {
  if (horizon < 1) throw ConfigError("forward_returns: horizon must be >= 1");
  auto f = panel.field_index(price_field);
  if (!f) throw DataError("unknown field: " + price_field);
  ForwardReturns out;
  out.horizon = horizon;
  out.surface = dsl::make_matrix(panel.dates, panel.instruments);
  std::size_t nd = panel.n_dates(), ni = panel.n_instruments();
  auto h = static_cast<std::size_t>(horizon);
  for (std::size_t d = 0; d + h < nd; ++d) {
    for (std::size_t i = 0; i < ni; ++i) {
      if (!panel.observed(d, i, *f) || !panel.observed(d + h, i, *f)) continue;
      double p0 = panel.at(d, i, *f);
      double p1 = panel.at(d + h, i, *f);
      if (std::abs(p0) < 1e-12) continue;  // undefined return base
      double r = p1 / p0 - 1.0;
      if (!std::isfinite(r)) continue;
      std::size_t idx = out.surface.index(d, i);
      out.surface.values[idx] = r;
      out.surface.mask[idx] = 1;
    }
  }
  return out;
}

DateSeries information_coefficient(const FactorMatrix& factor,
                                   const ForwardReturns& fwd, IcMethod method) {
  check_aligned(factor, fwd.surface, "factor/forward-returns");
  DateSeries out;
  out.dates = factor.dates;
  out.values.assign(factor.n_dates(), nan_value());
  out.mask.assign(factor.n_dates(), 0);
  std::size_t ni = factor.n_instruments();
  std::vector<double> xs, ys;
  for (std::size_t d = 0; d < factor.n_dates(); ++d) {
    xs.clear();
    ys.clear();
    for (std::size_t i = 0; i < ni; ++i) {
      if (factor.observed(d, i) && fwd.surface.observed(d, i)) {
        xs.push_back(factor.at(d, i));
        ys.push_back(fwd.surface.at(d, i));
      }
    }
    if (xs.size() < 3) continue;
    std::optional<double> r;
    if (method == IcMethod::spearman) {
      r = pearson(ranks_mean_position(xs), ranks_mean_position(ys));
    } else {
      r = pearson(xs, ys);
    }
    if (!r) continue;
    out.values[d] = *r;
    out.mask[d] = 1;
  }
  return out;
}

double fundamental_law_ir(double ic, double breadth) {
  if (breadth < 0.0) throw ConfigError("fundamental_law_ir: breadth must be >= 0");
  return ic * std::sqrt(breadth);
}

bool longshort_weights(const FactorMatrix& factor, std::size_t d,
                       const std::vector<std::size_t>& candidates, double q,
                       std::vector<double>& weights) {
  bool constant_section = true;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    if (factor.at(d, candidates[k]) != factor.at(d, candidates[0])) {
      constant_section = false;
      break;
    }
  }
  if (candidates.size() < 2 || constant_section) return false;

  std::size_t n = candidates.size();
  auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-12));
  if (k < 1) k = 1;

  // Ascending by (value, instrument id): shorts take the front; longs take
  // the back via the descending sort, preferring the earlier id within a
  // tied boundary on both sides.
  std::fill(weights.begin(), weights.end(), 0.0);
  double unit = 1.0 / static_cast<double>(k);
  std::vector<std::size_t> by_value = candidates;
  std::stable_sort(by_value.begin(), by_value.end(),
                   [&](std::size_t a, std::size_t b) {
                     return factor.at(d, a) < factor.at(d, b);
                   });
  for (std::size_t j = 0; j < k; ++j) weights[by_value[j]] -= unit;
  std::stable_sort(by_value.begin(), by_value.end(),
                   [&](std::size_t a, std::size_t b) {
                     return factor.at(d, a) > factor.at(d, b);
                   });
  for (std::size_t j = 0; j < k; ++j) weights[by_value[j]] += unit;
  return true;
}

LongShortResult quantile_longshort_returns(const FactorMatrix& factor,
                                           const ForwardReturns& fwd, double q,
                                           double cost_rate) {
  if (!(q > 0.0 && q <= 0.5)) {
    throw ConfigError("quantile_longshort: q must be in (0, 0.5]");
  }
  check_aligned(factor, fwd.surface, "factor/forward-returns");
  std::size_t nd = factor.n_dates(), ni = factor.n_instruments();
  LongShortResult out;
  out.returns.dates = factor.dates;
  out.returns.values.assign(nd, nan_value());
  out.returns.mask.assign(nd, 0);
  out.weights = portfolio::make_weight_series(factor.dates, factor.instruments);

  std::vector<double> prev(ni, 0.0), cur(ni, 0.0);
  std::vector<std::size_t> evaluable;
  for (std::size_t d = 0; d < nd; ++d) {
    evaluable.clear();
    for (std::size_t i = 0; i < ni; ++i) {
      if (factor.observed(d, i) && fwd.surface.observed(d, i)) {
        evaluable.push_back(i);
      }
    }
    if (!longshort_weights(factor, d, evaluable, q, cur)) {
      // not tradeable: hold prior weights, record the skip
      out.skipped_dates.push_back(factor.dates[d]);
      for (std::size_t i = 0; i < ni; ++i) {
        out.weights.weights[out.weights.index(d, i)] = prev[i];
      }
      cur = prev;
      continue;
    }
    double gross = 0.0, tw = 0.0;
    for (std::size_t i = 0; i < ni; ++i) {
      if (cur[i] != 0.0) gross += cur[i] * fwd.surface.at(d, i);
      tw += std::abs(cur[i] - prev[i]);
    }
    double turn = 0.5 * tw;
    out.returns.values[d] = gross - cost_rate * turn;
    out.returns.mask[d] = 1;
    for (std::size_t i = 0; i < ni; ++i) {
      out.weights.weights[out.weights.index(d, i)] = cur[i];
    }
    prev = cur;
  }
  return out;
}

double sharpe(const std::vector<double>& returns, int periods_per_year) {
  if (periods_per_year < 1) throw ConfigError("sharpe: periods_per_year must be >= 1");
  if (returns.size() < 2) {
    throw DomainError("sharpe: need >= 2 observations, got " +
                      std::to_string(returns.size()));
  }
  double sd = sample_std(returns);
  if (sd <= 0.0) throw DomainError("sharpe: degenerate variance (constant returns)");
  return mean(returns) / sd * std::sqrt(static_cast<double>(periods_per_year));
}

double max_drawdown(const std::vector<double>& returns) {
  double equity = 1.0;
  double peak = 1.0;
  double worst = 0.0;
  for (double r : returns) {
    equity *= 1.0 + r;
    peak = std::max(peak, equity);
    worst = std::max(worst, 1.0 - equity / peak);
  }
  return worst;
}

std::vector<double> turnover(const portfolio::WeightSeries& weights) {
  std::size_t nd = weights.n_dates(), ni = weights.n_instruments();
  std::vector<double> out(nd, 0.0);
  for (std::size_t d = 0; d < nd; ++d) {
    double s = 0.0;
    for (std::size_t i = 0; i < ni; ++i) {
      double prev = d == 0 ? 0.0 : weights.at(d - 1, i);
      s += std::abs(weights.at(d, i) - prev);
    }
    out[d] = 0.5 * s;
  }
  return out;
}

double redundancy(const FactorMatrix& candidate,
                  const std::vector<FactorMatrix>& base) {
  double worst = 0.0;
  std::vector<double> xs, ys;
  for (const auto& b : base) {
    check_aligned(candidate, b, "candidate/base");
    xs.clear();
    ys.clear();
    for (std::size_t idx = 0; idx < candidate.values.size(); ++idx) {
      if (candidate.mask[idx] && b.mask[idx]) {
        xs.push_back(candidate.values[idx]);
        ys.push_back(b.values[idx]);
      }
    }
    auto r = pearson(xs, ys);
    if (r) worst = std::max(worst, std::abs(*r));
  }
  return worst;
}

SplitPlan forward_splits(std::size_t n_dates, std::size_t train,
                         std::size_t valid, std::size_t test,
                         std::size_t step) {
  if (train < 1 || valid < 1 || test < 1) {
    throw ConfigError("forward_splits: train/valid/test sizes must be >= 1");
  }
  if (step < 1) throw ConfigError("forward_splits: step must be >= 1");
  std::size_t total = train + valid + test;
  if (total > n_dates) {
    throw ConfigError("forward_splits: train+valid+test = " +
                      std::to_string(total) + " exceeds " +
                      std::to_string(n_dates) + " dates");
  }
  SplitPlan plan;
  plan.step = step;
  for (std::size_t start = 0; start + total <= n_dates; start += step) {
    SplitWindow w;
    w.train_begin = start;
    w.train_end = start + train;
    w.valid_begin = w.train_end;
    w.valid_end = w.valid_begin + valid;
    w.test_begin = w.valid_end;
    w.test_end = w.test_begin + test;
    plan.windows.push_back(w);
  }
  return plan;
}

}  // namespace alphadesk::metrics
