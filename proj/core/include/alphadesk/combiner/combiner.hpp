#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/metrics/metrics.hpp"
#include "alphadesk/portfolio/weights.hpp"

namespace alphadesk::combiner {

using dsl::FactorMatrix;

// Ridge-regularized linear combination of factors. Coefficients act on
// standardized inputs; the per-factor mean/std are frozen at fit time, so
// prediction never consults test-time statistics. A factor whose fit window
// is constant gets std 0 and standardizes to 0 (it cannot carry signal).
struct CombinerModel {
  std::vector<std::string> factor_ids;
  Eigen::VectorXd coefficients;  // one per factor, standardized scale
  double intercept = 0.0;        // training mean of the target, unpenalized
  double lambda = 0.0;
  std::size_t fit_begin = 0, fit_end = 0;  // date-index window [begin, end)
  Eigen::VectorXd means, stds;             // frozen standardization
};

// Per-factor importance: the drop in mean IC after shuffling that factor
// within each date's cross-section, repeated K times.
struct ImportanceReport {
  std::vector<std::string> factor_ids;
  std::vector<double> mean_drop;
  std::vector<double> std_drop;  // sample std over repetitions; 0 when K = 1
  int repetitions = 0;
  std::uint64_t seed = 0;
};

// Per-date portfolio exposures to style factors, plus the share of portfolio
// return variance the exposure time series explains (OLS R^2). r_squared is
// NaN when the regression is degenerate or the style list is empty.
struct ExposureDecomposition {
  std::vector<std::string> dates;
  std::vector<std::string> style_ids;
  std::vector<double> exposures;  // date-major: [d * n_styles + j]
  double r_squared = 0.0;
};

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{0.0, 0.01, 0.1, 1.0, 10.0};
  return grid;
}

// Closed-form ridge on the pooled (date, instrument) rows of the window
// [window_begin, window_end): rows where every factor and the forward return
// are observed. The target is centered and the intercept is its mean
// (unpenalized); coefficients solve (Z'Z + lambda I) b = Z'(y - ybar) on the
// standardized design. Throws when the factor list is empty or misaligned,
// lambda < 0, or the window pools fewer than n_factors + 2 rows.
CombinerModel fit(const std::vector<FactorMatrix>& factors,
                  const std::vector<std::string>& factor_ids,
                  const metrics::ForwardReturns& fwd, std::size_t window_begin,
                  std::size_t window_end, double lambda);

// Linear score surface using the frozen parameters only; a cell is masked
// wherever any input factor is masked. The factor ids must match the model's
// ids exactly and in order.
FactorMatrix predict(const CombinerModel& model,
                     const std::vector<FactorMatrix>& factors,
                     const std::vector<std::string>& factor_ids);

// For each split window: fit on the train range once per candidate lambda,
// keep the candidate with the best mean IC on the validation range (ties to
// the earlier grid entry), and write that model's predictions into the test
// range. Test ranges never overlap, so each date's score comes from exactly
// one model, fit strictly on earlier dates.
FactorMatrix rolling_fit_predict(
    const std::vector<FactorMatrix>& factors,
    const std::vector<std::string>& factor_ids,
    const metrics::ForwardReturns& fwd, const metrics::SplitPlan& plan,
    const std::vector<double>& lambda_grid = default_lambda_grid());

// Permutation feature importance: for each factor j and repetition r, shuffle
// factor j's observed values within each date (masks stay in place), rerun
// predict, and record baseline mean IC minus shuffled mean IC. Every (j, r)
// task draws from its own derived RNG stream and results merge by index, so
// the report is identical for any worker count.
ImportanceReport permutation_importance(const CombinerModel& model,
                                        const std::vector<FactorMatrix>& factors,
                                        const std::vector<std::string>& factor_ids,
                                        const metrics::ForwardReturns& fwd,
                                        int repetitions, std::uint64_t seed,
                                        int workers = 1);

// exposure_j(t) = sum_i w(t,i) * style_j(t,i) over observed style cells, plus
// the R^2 of regressing the portfolio return series on the exposures.
ExposureDecomposition exposure_decomposition(
    const portfolio::WeightSeries& weights,
    const std::vector<FactorMatrix>& styles,
    const std::vector<std::string>& style_ids,
    const metrics::DateSeries& portfolio_returns);

// One header line of "intercept" + factor ids, one row of raw-scale
// coefficients (standardization folded in), so the row reproduces
// predictions from unstandardized factor values.
std::string model_csv(const CombinerModel& model);

// Header `factor_id,mean_drop,std_drop`, one row per factor.
std::string importance_csv(const ImportanceReport& report);

}  // namespace alphadesk::combiner
