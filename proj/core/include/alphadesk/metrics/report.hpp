#pragma once

#include <string>
#include <vector>

#include "alphadesk/metrics/metrics.hpp"

namespace alphadesk::metrics {

// Undefined statistics (degenerate variance, empty series) are carried as
// NaN and serialized as NA; only the standalone metric functions throw.
struct FactorReport {
  DateSeries ic_series;
  double ic_mean = 0.0;
  double ic_std = 0.0;
  double icir = 0.0;
  double annualized_return = 0.0;
  double sharpe = 0.0;
  double max_drawdown = 0.0;
  double avg_turnover = 0.0;
  double max_abs_corr_to_base = 0.0;
  std::size_t n_dates_evaluated = 0;
};

struct ReportSpec {
  IcMethod method = IcMethod::spearman;
  double quantile = 0.1;
  double cost_rate = 0.0;
  int periods_per_year = 252;
};

FactorReport build_report(const FactorMatrix& factor, const ForwardReturns& fwd,
                          const std::vector<FactorMatrix>& base,
                          const ReportSpec& spec);

std::string report_csv_header();
std::string report_csv_row(const std::string& name, const FactorReport& r);
std::string ic_series_csv(const DateSeries& ic);

}  // namespace alphadesk::metrics
