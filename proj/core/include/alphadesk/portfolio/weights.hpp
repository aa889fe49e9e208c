#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace alphadesk::portfolio {

// Position weights (fractions of capital) per date, date-major. Produced by
// the quantile rule or the optimizer; consumed by turnover and the backtest
// accumulator.
struct WeightSeries {
  std::vector<std::string> dates;
  std::vector<std::string> instruments;
  std::vector<double> weights;

  std::size_t n_dates() const { return dates.size(); }
  std::size_t n_instruments() const { return instruments.size(); }
  std::size_t index(std::size_t d, std::size_t i) const {
    return d * instruments.size() + i;
  }
  double at(std::size_t d, std::size_t i) const { return weights[index(d, i)]; }
};

inline WeightSeries make_weight_series(std::vector<std::string> dates,
                                       std::vector<std::string> instruments) {
  WeightSeries out;
  out.dates = std::move(dates);
  out.instruments = std::move(instruments);
  out.weights.assign(out.dates.size() * out.instruments.size(), 0.0);
  return out;
}

}  // namespace alphadesk::portfolio
