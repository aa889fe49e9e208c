#include "alphadesk/portfolio/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "alphadesk/common/error.hpp"

namespace alphadesk::portfolio {

namespace {

using Eigen::VectorXd;

constexpr int kMaxIterations = 10000;
constexpr int kMaxInnerCycles = 400;
constexpr double kFeasTol = 1e-6;

struct Feasibility {
  VectorXd lo, hi;            // combined box (weight cap, elementwise turnover)
  bool budget = false;
  bool aggregate = false;
  double aggregate_cap = 0.0;
  VectorXd prev;
  Eigen::MatrixXd sigma;      // symmetrized
  Eigen::MatrixXd eigvecs;
  VectorXd eigvals;           // clamped to >= 0
  double risk_cap = 0.0;
};

double risk_of(const Feasibility& f, const VectorXd& w) {
  return w.dot(f.sigma * w);
}

// Exact Euclidean projection onto {lo <= w <= hi} or, with the budget on,
// {lo <= w <= hi, sum w = 1}: clip(x + lambda) with lambda found by
// bisection (the shifted-clip form is the exact KKT solution).
VectorXd project_box(const Feasibility& f, const VectorXd& x) {
  VectorXd w = x.cwiseMax(f.lo).cwiseMin(f.hi);
  if (!f.budget) return w;
  double shift_lo = (f.lo - x).minCoeff();
  double shift_hi = (f.hi - x).maxCoeff();
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (shift_lo + shift_hi);
    double s = (x.array() + mid).cwiseMax(f.lo.array()).cwiseMin(f.hi.array()).sum();
    if (s < 1.0) {
      shift_lo = mid;
    } else {
      shift_hi = mid;
    }
  }
  double lambda = 0.5 * (shift_lo + shift_hi);
  return (x.array() + lambda).cwiseMax(f.lo.array()).cwiseMin(f.hi.array()).matrix();
}

// Projection onto {w : w' Sigma w <= C1} via the eigenbasis: the boundary
// solution is w = Q diag(1/(1+mu*eigval)) Q'x with mu found by bisection on
// the monotone residual risk.
VectorXd project_ellipsoid(const Feasibility& f, const VectorXd& x) {
  if (risk_of(f, x) <= f.risk_cap) return x;
  VectorXd y = f.eigvecs.transpose() * x;
  auto risk_at = [&](double mu) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      double denom = 1.0 + mu * f.eigvals[k];
      double wk = y[k] / denom;
      acc += f.eigvals[k] * wk * wk;
    }
    return acc;
  };
  double mu_hi = 1.0;
  while (risk_at(mu_hi) > f.risk_cap && mu_hi < 1e18) mu_hi *= 2.0;
  double mu_lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (mu_lo + mu_hi);
    if (risk_at(mid) > f.risk_cap) {
      mu_lo = mid;
    } else {
      mu_hi = mid;
    }
  }
  double mu = 0.5 * (mu_lo + mu_hi);
  VectorXd scaled(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    scaled[k] = y[k] / (1.0 + mu * f.eigvals[k]);
  }
  return f.eigvecs * scaled;
}

// Projection onto {w : sum |w_i - prev_i| <= cap}: soft-threshold the
// displacement, threshold found by bisection.
VectorXd project_l1(const Feasibility& f, const VectorXd& x) {
  VectorXd v = x - f.prev;
  double l1 = v.lpNorm<1>();
  if (l1 <= f.aggregate_cap) return x;
  double tau_lo = 0.0, tau_hi = v.cwiseAbs().maxCoeff();
  auto shrunk_l1 = [&](double tau) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      acc += std::max(std::abs(v[k]) - tau, 0.0);
    }
    return acc;
  };
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (tau_lo + tau_hi);
    if (shrunk_l1(mid) > f.aggregate_cap) {
      tau_lo = mid;
    } else {
      tau_hi = mid;
    }
  }
  double tau = 0.5 * (tau_lo + tau_hi);
  VectorXd out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    double mag = std::max(std::abs(v[k]) - tau, 0.0);
    out[k] = f.prev[k] + std::copysign(mag, v[k]);
  }
  return out;
}

// Cyclic Dykstra over the active constraint sets; the box set runs last so
// the returned point satisfies it exactly.
VectorXd project_feasible(const Feasibility& f, const VectorXd& x) {
  std::vector<std::function<VectorXd(const VectorXd&)>> sets;
  sets.emplace_back([&f](const VectorXd& p) { return project_ellipsoid(f, p); });
  if (f.aggregate) {
    sets.emplace_back([&f](const VectorXd& p) { return project_l1(f, p); });
  }
  sets.emplace_back([&f](const VectorXd& p) { return project_box(f, p); });

  VectorXd cur = x;
  std::vector<VectorXd> corrections(sets.size(), VectorXd::Zero(x.size()));
  for (int cycle = 0; cycle < kMaxInnerCycles; ++cycle) {
    VectorXd before = cur;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      VectorXd shifted = cur + corrections[j];
      VectorXd projected = sets[j](shifted);
      corrections[j] = shifted - projected;
      cur = projected;
    }
    // `cur` can sit pinned at a box corner for several cycles while the dual
    // corrections still grow, so lack of movement alone is not convergence:
    // require the point to actually satisfy the non-box families too.
    if ((cur - before).lpNorm<Eigen::Infinity>() < 1e-13 &&
        risk_of(f, cur) <= f.risk_cap * (1.0 + 1e-9) + 1e-12 &&
        (!f.aggregate ||
         (cur - f.prev).lpNorm<1>() <= f.aggregate_cap + 1e-9)) {
      break;
    }
  }
  return cur;
}

bool feasible_within(const Feasibility& f, const VectorXd& w, double tol) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] < f.lo[i] - tol || w[i] > f.hi[i] + tol) return false;
  }
  if (f.budget && std::abs(w.sum() - 1.0) > tol) return false;
  if (f.aggregate && (w - f.prev).lpNorm<1>() > f.aggregate_cap + tol) return false;
  double scale = std::max(1.0, f.risk_cap);
  if (risk_of(f, w) > f.risk_cap + tol * scale) return false;
  return true;
}

}  // namespace

Eigen::VectorXd solve_weights(const QpSpec& spec, double tolerance) {
  Eigen::Index n = spec.expected_returns.size();
  if (n == 0) throw DataError("solve_weights: empty instrument set");
  if (spec.prev_weights.size() != n || spec.sigma.matrix.rows() != n ||
      spec.sigma.matrix.cols() != n) {
    throw DataError("solve_weights: dimension mismatch between returns, sigma, and prev weights");
  }
  if (!(spec.risk_cap > 0.0)) throw ConfigError("solve_weights: risk cap C1 must be > 0");
  if (!(spec.turnover_cap >= 0.0)) throw ConfigError("solve_weights: turnover cap C2 must be >= 0");
  if (!(spec.weight_cap > 0.0 && spec.weight_cap <= 1.0)) {
    throw ConfigError("solve_weights: weight cap C3 must be in (0, 1]");
  }
  if (!(tolerance > 0.0)) throw ConfigError("solve_weights: tolerance must be > 0");

  Feasibility f;
  f.sigma = 0.5 * (spec.sigma.matrix + spec.sigma.matrix.transpose());
  double asym = (spec.sigma.matrix - spec.sigma.matrix.transpose())
                    .lpNorm<Eigen::Infinity>();
  if (asym > 1e-9 * std::max(1.0, f.sigma.lpNorm<Eigen::Infinity>())) {
    throw DataError("solve_weights: sigma is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f.sigma);
  if (eig.info() != Eigen::Success) {
    throw InternalError("solve_weights: eigendecomposition failed");
  }
  double max_eig = eig.eigenvalues().maxCoeff();
  double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -1e-8 * std::max(1.0, max_eig)) {
    throw DataError("solve_weights: sigma is not positive semidefinite");
  }
  f.eigvecs = eig.eigenvectors();
  f.eigvals = eig.eigenvalues().cwiseMax(0.0);
  f.risk_cap = spec.risk_cap;
  f.budget = spec.budget_sum_to_one;
  f.aggregate = spec.aggregate_turnover;
  f.aggregate_cap = spec.turnover_cap;
  f.prev = spec.prev_weights;

  if (spec.aggregate_turnover) {
    f.lo = VectorXd::Zero(n);
    f.hi = VectorXd::Constant(n, spec.weight_cap);
  } else {
    f.lo = spec.prev_weights.array() - spec.turnover_cap;
    f.lo = f.lo.cwiseMax(0.0);
    f.hi = spec.prev_weights.array() + spec.turnover_cap;
    f.hi = f.hi.cwiseMin(spec.weight_cap);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (f.lo[i] > f.hi[i] + 1e-12) {
      throw DomainError(
          "solve_weights: infeasible turnover/box constraints (previous weight " +
          std::to_string(spec.prev_weights[i]) + " outside [0, C3] by more than C2)");
    }
    f.lo[i] = std::min(f.lo[i], f.hi[i]);
  }
  if (f.budget) {
    if (f.lo.sum() > 1.0 + 1e-9 || f.hi.sum() < 1.0 - 1e-9) {
      throw DomainError("solve_weights: infeasible budget constraint (box cannot reach sum 1)");
    }
  }

  // Feasibility certificate: previous weights clipped into the box, budget-
  // projected when enabled. The risk cap must hold there.
  VectorXd cert = project_box(f, spec.prev_weights);
  if (f.aggregate && (cert - f.prev).lpNorm<1>() > f.aggregate_cap + 1e-9) {
    throw DomainError("solve_weights: infeasible aggregate turnover constraint at the clipped start");
  }
  if (risk_of(f, cert) > f.risk_cap * (1.0 + 1e-9) + 1e-12) {
    throw DomainError("solve_weights: infeasible risk cap (clipped previous weights exceed C1)");
  }

  const VectorXd& r = spec.expected_returns;
  double r_norm = r.norm();
  if (r_norm == 0.0) return cert;  // flat objective: minimum-turnover point

  // Step scale proportional to the box diagonal and inversely to |r|, so the
  // iterate path is invariant under positive rescaling of r.
  double box_span = (f.hi - f.lo).norm();
  double eta = (box_span > 0.0 ? box_span : 1.0) / r_norm;

  VectorXd w = cert;
  VectorXd best = cert;
  double best_obj = r.dot(cert);
  for (int it = 0; it < kMaxIterations; ++it) {
    VectorXd next = project_feasible(f, w + eta * r);
    double obj = r.dot(next);
    if (obj > best_obj && feasible_within(f, next, 0.5 * kFeasTol)) {
      best_obj = obj;
      // An accepted step that barely moved means we sit at a fixpoint of the
      // projected-ascent map, which for a linear objective is the optimum.
      bool settled = (next - best).lpNorm<Eigen::Infinity>() < tolerance;
      best = next;
      w = next;
      if (settled) break;
    } else {
      // Reject: shrink the step and retry from the best feasible point so a
      // bad excursion can never drag the iterate downhill.
      eta *= 0.5;
      if (eta * r_norm < 1e-16 * std::max(1.0, box_span)) break;
      w = best;
    }
  }

  // Hard clamp into the box (moves are below feasibility tolerance), then
  // certify every constraint family post-hoc.
  VectorXd out = best.cwiseMax(f.lo).cwiseMin(f.hi);
  if (!feasible_within(f, out, kFeasTol)) {
    throw InternalError("solve_weights: returned point failed constraint certification");
  }
  return out;
}

}  // namespace alphadesk::portfolio
