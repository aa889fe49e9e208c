#include "alphadesk/metrics/report.hpp"

#include <cmath>

#include "alphadesk/common/num.hpp"
#include "alphadesk/common/stats.hpp"

namespace alphadesk::metrics {

namespace {

std::string fmt_or_na(double v) {
  return std::isfinite(v) ? format_double(v) : "NA";
}

}  // namespace

FactorReport build_report(const FactorMatrix& factor, const ForwardReturns& fwd,
                          const std::vector<FactorMatrix>& base,
                          const ReportSpec& spec) {
  FactorReport rep;
  rep.ic_series = information_coefficient(factor, fwd, spec.method);

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

  LongShortResult ls =
      quantile_longshort_returns(factor, fwd, spec.quantile, spec.cost_rate);
  std::vector<double> rets;
  for (std::size_t d = 0; d < ls.returns.values.size(); ++d) {
    if (ls.returns.mask[d]) rets.push_back(ls.returns.values[d]);
  }
  rep.annualized_return =
      rets.empty() ? nan_value()
                   : mean(rets) * static_cast<double>(spec.periods_per_year);
  if (rets.size() >= 2 && sample_std(rets) > 0.0) {
    rep.sharpe = sharpe(rets, spec.periods_per_year);
  } else {
    rep.sharpe = nan_value();
  }
  rep.max_drawdown = max_drawdown(rets);

  std::vector<double> turns = turnover(ls.weights);
  std::vector<double> traded_turns;
  for (std::size_t d = 0; d < turns.size(); ++d) {
    if (ls.returns.mask[d]) traded_turns.push_back(turns[d]);
  }
  rep.avg_turnover = traded_turns.empty() ? nan_value() : mean(traded_turns);

  rep.max_abs_corr_to_base = redundancy(factor, base);
  return rep;
}

std::string report_csv_header() {
  return "name,n_dates,ic_mean,ic_std,icir,annualized_return,sharpe,"
         "max_drawdown,avg_turnover,max_abs_corr_to_base";
}

std::string report_csv_row(const std::string& name, const FactorReport& r) {
  std::string out = name;
  out += ',' + std::to_string(r.n_dates_evaluated);
  out += ',' + fmt_or_na(r.ic_mean);
  out += ',' + fmt_or_na(r.ic_std);
  out += ',' + fmt_or_na(r.icir);
  out += ',' + fmt_or_na(r.annualized_return);
  out += ',' + fmt_or_na(r.sharpe);
  out += ',' + fmt_or_na(r.max_drawdown);
  out += ',' + fmt_or_na(r.avg_turnover);
  out += ',' + fmt_or_na(r.max_abs_corr_to_base);
  return out;
}

std::string ic_series_csv(const DateSeries& ic) {
  std::string out = "date,ic\n";
  for (std::size_t d = 0; d < ic.dates.size(); ++d) {
    out += ic.dates[d];
    out += ',';
    out += ic.mask[d] ? format_double(ic.values[d]) : "NA";
    out += '\n';
  }
  return out;
}

}  // namespace alphadesk::metrics
