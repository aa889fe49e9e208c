#pragma once

#include <Eigen/Dense>

#include "alphadesk/portfolio/covariance.hpp"

namespace alphadesk::portfolio {

// The per-date program:
//   maximize   w . expected_returns
//   subject to w' Sigma w <= risk_cap            (C1)
//              |w_i - prev_i| <= turnover_cap    (C2, elementwise by default)
//              0 <= w_i <= weight_cap            (C3)
//              sum w_i = 1                       (optional budget)
// With aggregate_turnover the C2 constraint reads sum_i |w_i - prev_i| <= C2
// instead of elementwise.
struct QpSpec {
  Eigen::VectorXd expected_returns;
  CovEstimate sigma;
  double risk_cap = 1.0;
  double turnover_cap = 1.0;
  double weight_cap = 1.0;
  Eigen::VectorXd prev_weights;
  bool budget_sum_to_one = false;
  bool aggregate_turnover = false;
};

// Projected gradient ascent on w.r with Dykstra alternating projection onto
// the box(+budget) set and the risk ellipsoid; every projection has a closed
// form (bisection on one scalar). Feasibility precondition: the previous
// weights clipped into the box (budget-projected when enabled) must satisfy
// all constraints, otherwise a DomainError names the violated family.
// Stops when the weight change drops below `tolerance` (capped at 10,000
// iterations); the returned point is re-checked against all constraint
// families at 1e-6.
Eigen::VectorXd solve_weights(const QpSpec& spec, double tolerance = 1e-9);

}  // namespace alphadesk::portfolio
