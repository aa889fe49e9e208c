#include "alphadesk/portfolio/covariance.hpp"

#include "alphadesk/common/error.hpp"

namespace alphadesk::portfolio {

CovEstimate estimate_covariance(const dsl::FactorMatrix& returns_window,
                                double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw ConfigError("estimate_covariance: delta must be in [0, 1]");
  }
  std::size_t nd = returns_window.n_dates();
  std::size_t ni = returns_window.n_instruments();
  if (nd < 2) {
    throw DataError("estimation error: covariance window needs >= 2 dates, got " +
                    std::to_string(nd));
  }
  auto n = static_cast<Eigen::Index>(ni);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < ni; ++j) {
    for (std::size_t k = j; k < ni; ++k) {
      double mj = 0.0, mk = 0.0;
      std::size_t cnt = 0;
      for (std::size_t d = 0; d < nd; ++d) {
        if (returns_window.observed(d, j) && returns_window.observed(d, k)) {
          mj += returns_window.at(d, j);
          mk += returns_window.at(d, k);
          ++cnt;
        }
      }
      if (cnt < 2) continue;  // no joint information: leave 0
      mj /= static_cast<double>(cnt);
      mk /= static_cast<double>(cnt);
      double acc = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        if (returns_window.observed(d, j) && returns_window.observed(d, k)) {
          acc += (returns_window.at(d, j) - mj) * (returns_window.at(d, k) - mk);
        }
      }
      double cov = acc / static_cast<double>(cnt - 1);
      s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = cov;
      s(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = cov;
    }
  }
  double target = ni == 0 ? 0.0 : s.trace() / static_cast<double>(ni);
  CovEstimate out;
  out.matrix = (1.0 - delta) * s +
               delta * target * Eigen::MatrixXd::Identity(n, n);
  out.lookback = static_cast<int>(nd);
  out.delta = delta;
  return out;
}

}  // namespace alphadesk::portfolio
