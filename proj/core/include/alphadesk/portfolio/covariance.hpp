#pragma once

#include <Eigen/Dense>

#include "alphadesk/dsl/eval.hpp"

namespace alphadesk::portfolio {

struct CovEstimate {
  Eigen::MatrixXd matrix;  // n x n, symmetric
  int lookback = 0;        // window length used
  double delta = 0.0;      // shrinkage toward the scaled identity
};

// (1-delta) * S + delta * (trace(S)/n) * I, where S is the sample covariance
// over the window, pairwise-complete with per-pair means. Pairs with fewer
// than 2 joint observations contribute 0. Positive semidefiniteness is
// guaranteed for fully observed windows; the solver re-checks its input.
CovEstimate estimate_covariance(const dsl::FactorMatrix& returns_window,
                                double delta);

}  // namespace alphadesk::portfolio
