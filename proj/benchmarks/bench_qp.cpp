// Constrained mean-variance solve times across universe sizes.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "alphadesk/common/rng.hpp"
#include "alphadesk/portfolio/solver.hpp"

namespace {

alphadesk::portfolio::QpSpec random_spec(Eigen::Index n, std::uint64_t seed) {
  alphadesk::RngStream rng(seed);
  alphadesk::portfolio::QpSpec spec;
  spec.expected_returns.resize(n);
  spec.prev_weights = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    spec.expected_returns[r] = rng.normal() * 0.01;
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = rng.normal();
  }
  // SPD sigma: A A^T / n plus a diagonal ridge.
  spec.sigma.matrix = a * a.transpose() / static_cast<double>(n) +
                      0.05 * Eigen::MatrixXd::Identity(n, n);
  spec.risk_cap = 0.04;
  spec.turnover_cap = 0.5;
  spec.weight_cap = 0.1;
  return spec;
}

void bm_qp_solve(benchmark::State& state) {
  const auto spec = random_spec(state.range(0), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(alphadesk::portfolio::solve_weights(spec));
  }
}

}  // namespace

BENCHMARK(bm_qp_solve)->Arg(10)->Arg(50)->Arg(100);

BENCHMARK_MAIN();
