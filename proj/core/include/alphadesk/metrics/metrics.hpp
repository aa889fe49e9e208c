#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/portfolio/weights.hpp"

namespace alphadesk::metrics {

using dsl::FactorMatrix;

// Realized forward return surface: cell (t, i) = price(t+horizon)/price(t) - 1.
// The last `horizon` dates are fully masked. Evaluation-only data: never fed
// back into factor computation.
struct ForwardReturns {
  int horizon = 1;
  FactorMatrix surface;
};

ForwardReturns forward_returns(const panel::PanelFrame& panel,
                               const std::string& price_field, int horizon);

// Per-date series aligned to a factor's date axis; masked entries are dates
// where the statistic is undefined.
struct DateSeries {
  std::vector<std::string> dates;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
};

enum class IcMethod { pearson, spearman };

// Per-date correlation between factor and forward-return cross-sections over
// jointly observed instruments. Dates with < 3 joint observations or zero
// variance on either side are masked.
DateSeries information_coefficient(const FactorMatrix& factor,
                                   const ForwardReturns& fwd, IcMethod method);

// Expected information ratio IC * sqrt(breadth).
double fundamental_law_ir(double ic, double breadth);

struct LongShortResult {
  DateSeries returns;                     // masked on skipped dates
  portfolio::WeightSeries weights;        // skipped dates hold prior weights
  std::vector<std::string> skipped_dates;
};

// Per rebalance date: long the top ceil(q*n) instruments by factor value and
// short the bottom ceil(q*n), equal weights summing to +1 / -1; ties broken
// by instrument identifier. Period return = w.fwd - cost_rate * turnover(t).
// Dates with < 2 jointly evaluable instruments or a constant factor
// cross-section are skipped and recorded.
LongShortResult quantile_longshort_returns(const FactorMatrix& factor,
                                           const ForwardReturns& fwd, double q,
                                           double cost_rate);

// The weight construction shared by quantile_longshort_returns and the
// backtest's quantile mode: equal weights +-1/ceil(q*n) over the top/bottom
// of the date-d cross-section restricted to `candidates`. Writes a full
// instrument-length vector into `weights` (zeros elsewhere); returns false
// (weights untouched) when fewer than 2 candidates or all values tie.
bool longshort_weights(const FactorMatrix& factor, std::size_t d,
                       const std::vector<std::size_t>& candidates, double q,
                       std::vector<double>& weights);

// mean/std * sqrt(periods_per_year), sample std. Throws on < 2 observations
// or zero variance.
double sharpe(const std::vector<double>& returns, int periods_per_year);

// Max over t <= u of 1 - E(u)/E(t) on the compounded equity curve (E(0) = 1
// included). Empty series -> 0.
double max_drawdown(const std::vector<double>& returns);

// Per-date 0.5 * sum_i |w(t, i) - w(t-1, i)|, with w(-1) all zero.
std::vector<double> turnover(const portfolio::WeightSeries& weights);

// Max over the base of |Pearson correlation| pooled over all jointly
// observed cells. Empty base -> 0; undefined pairs contribute 0.
double redundancy(const FactorMatrix& candidate,
                  const std::vector<FactorMatrix>& base);

// Half-open index ranges [begin, end) with train < validation < test.
struct SplitWindow {
  std::size_t train_begin, train_end;
  std::size_t valid_begin, valid_end;
  std::size_t test_begin, test_end;
};

struct SplitPlan {
  std::vector<SplitWindow> windows;
  std::size_t step = 0;
};

// Windows at offsets 0, step, 2*step, ... while the whole window fits.
SplitPlan forward_splits(std::size_t n_dates, std::size_t train,
                         std::size_t valid, std::size_t test, std::size_t step);

}  // namespace alphadesk::metrics
