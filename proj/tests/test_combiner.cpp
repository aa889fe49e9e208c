// Ridge combination, rolling retraining, permutation importance, and
// exposure decomposition, checked against an independent QR-based OLS oracle
// and hand cases.
#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "alphadesk/combiner/combiner.hpp"
#include "alphadesk/common/error.hpp"
#include "alphadesk/common/io.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/common/rng.hpp"
#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/metrics/metrics.hpp"
#include "alphadesk/panel/panel.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace alphadesk;

namespace {

struct Fixture {
  std::vector<dsl::FactorMatrix> factors;
  std::vector<std::string> ids;
  metrics::ForwardReturns fwd;
};

// Factors are independent noise surfaces; the forward-return surface is a
// noisy linear blend of them, so the regression has real structure.
Fixture make_fixture(std::size_t n_dates, std::size_t n_instruments,
                     unsigned seed, double missing = 0.0) {
  Fixture fx;
  fx.factors.push_back(
      testutil::random_surface(n_dates, n_instruments, seed, missing));
  fx.factors.push_back(
      testutil::random_surface(n_dates, n_instruments, seed + 1, missing));
  fx.factors.push_back(
      testutil::random_surface(n_dates, n_instruments, seed + 2, missing));
  fx.ids = {"f_a", "f_b", "f_c"};
  RngStream rng(seed + 3);
  fx.fwd.horizon = 1;
  fx.fwd.surface = dsl::make_matrix(fx.factors[0].dates,
                                    fx.factors[0].instruments);
  for (std::size_t c = 0; c < fx.fwd.surface.values.size(); ++c) {
    const double noise = rng.normal();
    if (fx.factors[0].mask[c] && fx.factors[1].mask[c] && fx.factors[2].mask[c] &&
        rng.uniform01() > missing) {
      fx.fwd.surface.values[c] = 0.02 * fx.factors[0].values[c] -
                                 0.01 * fx.factors[1].values[c] + 0.005 * noise;
      fx.fwd.surface.mask[c] = 1;
    }
  }
  return fx;
}

// Independent OLS via QR on the standardized design built from scratch.
Eigen::VectorXd ols_oracle(const Fixture& fx, std::size_t begin,
                           std::size_t end, double* intercept_out) {
  std::vector<std::size_t> rd, ri;
  const std::size_t ni = fx.fwd.surface.n_instruments();
  for (std::size_t d = begin; d < end; ++d) {
    for (std::size_t i = 0; i < ni; ++i) {
      bool ok = fx.fwd.surface.observed(d, i);
      for (const auto& f : fx.factors) ok = ok && f.observed(d, i);
      if (ok) {
        rd.push_back(d);
        ri.push_back(i);
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(rd.size());
  const auto k = static_cast<Eigen::Index>(fx.factors.size());
  Eigen::MatrixXd z(m, k);
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    y[r] = fx.fwd.surface.at(rd[static_cast<std::size_t>(r)],
                             ri[static_cast<std::size_t>(r)]);
    for (Eigen::Index j = 0; j < k; ++j) {
      z(r, j) = fx.factors[static_cast<std::size_t>(j)].at(
          rd[static_cast<std::size_t>(r)], ri[static_cast<std::size_t>(r)]);
    }
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const double mu = z.col(j).mean();
    const double sd = std::sqrt((z.col(j).array() - mu).square().sum() /
                                static_cast<double>(m - 1));
    z.col(j) = (z.col(j).array() - mu) / sd;
  }
  *intercept_out = y.mean();
  return z.colPivHouseholderQr().solve(
      (y.array() - y.mean()).matrix().eval());
}

}  // namespace

TEST_SUITE_BEGIN("combiner");

TEST_CASE("lambda zero reproduces ordinary least squares") {
  // [DERIVED] closed-form ridge at lambda=0 must match a QR solve of the
  // same regression built independently in the test.
  auto fx = make_fixture(20, 12, 300, 0.1);
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 20, 0.0);
  double intercept = 0.0;
  const auto want = ols_oracle(fx, 0, 20, &intercept);
  REQUIRE(model.coefficients.size() == want.size());
  for (Eigen::Index j = 0; j < want.size(); ++j) {
    CHECK(std::abs(model.coefficients[j] - want[j]) < 1e-8);
  }
  CHECK(model.intercept == doctest::Approx(intercept).epsilon(1e-14));
  CHECK(model.lambda == 0.0);
  CHECK(model.fit_begin == 0);
  CHECK(model.fit_end == 20);
}

TEST_CASE("coefficient norm shrinks monotonically in lambda") {
  auto fx = make_fixture(15, 10, 310);
  double prev_norm = -1.0;
  bool first = true;
  for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e6}) {
    const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 15, lambda);
    const double norm = model.coefficients.norm();
    if (!first) CHECK(norm <= prev_norm + 1e-12);
    prev_norm = norm;
    first = false;
  }
  // Extreme regularization pins the coefficients at zero.
  CHECK(prev_norm < 1e-4);
}

TEST_CASE("standardization is frozen at fit time") {
  auto fx = make_fixture(30, 8, 320);
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 12, 0.5);

  // Corrupt every value from date 12 onward; the model and the predictions
  // on the fit range must not move.
  auto corrupted = fx.factors;
  for (auto& f : corrupted) {
    for (std::size_t d = 12; d < f.n_dates(); ++d) {
      for (std::size_t i = 0; i < f.n_instruments(); ++i) {
        f.values[f.index(d, i)] += 1e6;
      }
    }
  }
  const auto model2 =
      combiner::fit(corrupted, fx.ids, fx.fwd, 0, 12, 0.5);
  CHECK(model2.coefficients == model.coefficients);
  CHECK(model2.means == model.means);
  CHECK(model2.stds == model.stds);
  CHECK(model2.intercept == model.intercept);

  const auto p1 = combiner::predict(model, fx.factors, fx.ids);
  const auto p2 = combiner::predict(model, corrupted, fx.ids);
  for (std::size_t d = 0; d < 12; ++d) {
    for (std::size_t i = 0; i < p1.n_instruments(); ++i) {
      CHECK(p1.mask[p1.index(d, i)] == p2.mask[p2.index(d, i)]);
      if (p1.mask[p1.index(d, i)]) {
        CHECK(p1.values[p1.index(d, i)] == p2.values[p2.index(d, i)]);
      }
    }
  }

  // Direct formula: score = intercept + sum_j b_j (x_j - mean_j) / std_j.
  const std::size_t d = 5, i = 3;
  double want = model.intercept;
  for (std::size_t j = 0; j < fx.factors.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    want += model.coefficients[jj] *
            (fx.factors[j].at(d, i) - model.means[jj]) / model.stds[jj];
  }
  REQUIRE(p1.mask[p1.index(d, i)] == 1);
  CHECK(p1.values[p1.index(d, i)] == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("a factor constant over the fit window carries no signal") {
  auto fx = make_fixture(20, 10, 330);
  // Make f_c constant on the fit window but varying afterwards.
  for (std::size_t d = 0; d < 10; ++d) {
    for (std::size_t i = 0; i < 10; ++i) {
      fx.factors[2].values[fx.factors[2].index(d, i)] = 4.0;
      fx.factors[2].mask[fx.factors[2].index(d, i)] = 1;
    }
  }
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 10, 0.1);
  CHECK(model.stds[2] == 0.0);
  CHECK(std::abs(model.coefficients[2]) < 1e-14);

  // Shuffling it cannot change predictions: importance is exactly zero.
  const auto imp = combiner::permutation_importance(model, fx.factors, fx.ids,
                                                    fx.fwd, 3, 77);
  CHECK(imp.mean_drop[2] == 0.0);
  CHECK(imp.std_drop[2] == 0.0);
}

TEST_CASE("predict masks any cell with a masked input") {
  auto fx = make_fixture(6, 5, 340);
  fx.factors[1].mask[fx.factors[1].index(2, 3)] = 0;
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 6, 1.0);
  const auto p = combiner::predict(model, fx.factors, fx.ids);
  CHECK(p.mask[p.index(2, 3)] == 0);
}

TEST_CASE("fit and predict validation") {
  auto fx = make_fixture(10, 6, 350);
  CHECK_THROWS_AS(
      (void)combiner::fit({}, {}, fx.fwd, 0, 10, 0.0), DataError);
  CHECK_THROWS_AS(
      (void)combiner::fit(fx.factors, {"x"}, fx.fwd, 0, 10, 0.0), DataError);
  CHECK_THROWS_AS(
      (void)combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 10, -0.5), ConfigError);
  CHECK_THROWS_AS(
      (void)combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 11, 0.0), DataError);
  CHECK_THROWS_AS(
      (void)combiner::fit(fx.factors, fx.ids, fx.fwd, 7, 3, 0.0), DataError);
  // A one-date window pools 6 rows but needs k + 2 = 5: shrink further by
  // masking so it definitely starves.
  auto starved = fx;
  for (std::size_t i = 2; i < 6; ++i) {
    starved.factors[0].mask[starved.factors[0].index(0, i)] = 0;
  }
  CHECK_THROWS_WITH_AS(
      (void)combiner::fit(starved.factors, starved.ids, starved.fwd, 0, 1, 0.0),
      doctest::Contains("pools"), DataError);

  auto other = make_fixture(9, 6, 351);
  CHECK_THROWS_WITH_AS(
      (void)combiner::fit({fx.factors[0], other.factors[1]}, {"a", "b"},
                          fx.fwd, 0, 9, 0.0),
      doctest::Contains("alignment error"), DataError);

  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 10, 0.0);
  CHECK_THROWS_AS(
      (void)combiner::predict(model, fx.factors, {"f_a", "f_b", "zzz"}),
      DataError);
}

TEST_CASE("rolling predictions cover exactly the test ranges") {
  auto fx = make_fixture(30, 8, 360);
  const auto plan = metrics::forward_splits(30, 10, 4, 4, 6);
  REQUIRE(plan.windows.size() >= 2);
  const auto scores =
      combiner::rolling_fit_predict(fx.factors, fx.ids, fx.fwd, plan);
  std::vector<bool> in_test(30, false);
  for (const auto& w : plan.windows) {
    for (std::size_t d = w.test_begin; d < w.test_end; ++d) in_test[d] = true;
  }
  for (std::size_t d = 0; d < 30; ++d) {
    for (std::size_t i = 0; i < 8; ++i) {
      if (in_test[d]) {
        CHECK(scores.mask[scores.index(d, i)] == 1);
      } else {
        CHECK(scores.mask[scores.index(d, i)] == 0);
      }
    }
  }
}

TEST_CASE("rolling scores never look past their test window") {
  // Property: corrupting all data at dates >= the first test_end leaves the
  // first window's scores untouched.
  auto fx = make_fixture(40, 6, 370, 0.05);
  const auto plan = metrics::forward_splits(40, 12, 5, 5, 9);
  REQUIRE(plan.windows.size() >= 2);
  const auto base =
      combiner::rolling_fit_predict(fx.factors, fx.ids, fx.fwd, plan);

  const std::size_t cut = plan.windows[0].test_end;
  auto fx2 = fx;
  for (auto& f : fx2.factors) {
    for (std::size_t d = cut; d < f.n_dates(); ++d) {
      for (std::size_t i = 0; i < f.n_instruments(); ++i) {
        f.values[f.index(d, i)] = -123.0;
      }
    }
  }
  for (std::size_t d = cut; d < 40; ++d) {
    for (std::size_t i = 0; i < 6; ++i) {
      fx2.fwd.surface.values[fx2.fwd.surface.index(d, i)] = 0.5;
    }
  }
  const auto moved =
      combiner::rolling_fit_predict(fx2.factors, fx2.ids, fx2.fwd, plan);
  for (std::size_t d = plan.windows[0].test_begin; d < cut; ++d) {
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(base.mask[base.index(d, i)] == moved.mask[moved.index(d, i)]);
      if (base.mask[base.index(d, i)]) {
        CHECK(base.values[base.index(d, i)] == moved.values[moved.index(d, i)]);
      }
    }
  }
}

TEST_CASE("rolling lambda grid handling") {
  auto fx = make_fixture(24, 6, 380);
  const auto plan = metrics::forward_splits(24, 8, 4, 4, 8);
  CHECK_THROWS_AS((void)combiner::rolling_fit_predict(fx.factors, fx.ids,
                                                      fx.fwd, plan, {}),
                  ConfigError);
  const auto a =
      combiner::rolling_fit_predict(fx.factors, fx.ids, fx.fwd, plan, {0.1});
  const auto b = combiner::rolling_fit_predict(fx.factors, fx.ids, fx.fwd,
                                               plan, {0.1, 0.1, 0.1});
  REQUIRE(a.mask == b.mask);
  for (std::size_t c = 0; c < a.values.size(); ++c) {
    if (a.mask[c]) CHECK(a.values[c] == b.values[c]);
  }

  metrics::SplitPlan bad = plan;
  bad.windows[0].test_end = 99;
  CHECK_THROWS_AS(
      (void)combiner::rolling_fit_predict(fx.factors, fx.ids, fx.fwd, bad),
      DataError);
}

TEST_CASE("permutation importance finds the planted factor") {
  // The target IS factor a (no noise): shuffling a destroys all rank
  // correlation, shuffling the pure-noise factor changes almost nothing.
  auto fx = make_fixture(25, 20, 390);
  for (std::size_t c = 0; c < fx.fwd.surface.values.size(); ++c) {
    if (fx.fwd.surface.mask[c]) {
      fx.fwd.surface.values[c] = fx.factors[0].values[c];
    }
  }
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 25, 0.0);
  const auto imp = combiner::permutation_importance(model, fx.factors, fx.ids,
                                                    fx.fwd, 5, 2024);
  CHECK(imp.mean_drop[0] > 0.5);
  CHECK(std::abs(imp.mean_drop[1]) < 0.2);
  CHECK(std::abs(imp.mean_drop[2]) < 0.2);
  CHECK(imp.repetitions == 5);
  CHECK(imp.seed == 2024);
}

TEST_CASE("permutation importance is identical for any worker count") {
  auto fx = make_fixture(15, 10, 400, 0.1);
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 15, 0.1);
  const auto one = combiner::permutation_importance(model, fx.factors, fx.ids,
                                                    fx.fwd, 4, 99, 1);
  const auto many = combiner::permutation_importance(model, fx.factors, fx.ids,
                                                     fx.fwd, 4, 99, 4);
  CHECK(one.mean_drop == many.mean_drop);
  CHECK(one.std_drop == many.std_drop);

  const auto single = combiner::permutation_importance(
      model, fx.factors, fx.ids, fx.fwd, 1, 99, 2);
  for (double sd : single.std_drop) CHECK(sd == 0.0);

  CHECK_THROWS_AS((void)combiner::permutation_importance(
                      model, fx.factors, fx.ids, fx.fwd, 0, 99),
                  ConfigError);
  CHECK_THROWS_AS((void)combiner::permutation_importance(
                      model, fx.factors, {"a", "b", "c"}, fx.fwd, 2, 99),
                  DataError);
}

TEST_CASE("exposure decomposition matches the hand oracle") {
  auto weights = portfolio::make_weight_series(testutil::date_axis(2),
                                               testutil::instrument_axis(2));
  weights.weights = {0.5, -0.5, 1.0, 0.0};
  auto style = dsl::make_matrix(weights.dates, weights.instruments);
  style.values = {2.0, 4.0, 6.0, 8.0};
  style.mask = {1, 1, 1, 1};
  metrics::DateSeries rets;
  rets.dates = weights.dates;
  rets.values = {0.01, 0.02};
  rets.mask = {1, 1};
  const auto dec =
      combiner::exposure_decomposition(weights, {style}, {"s"}, rets);
  // [DERIVED] e(0) = 0.5*2 - 0.5*4 = -1; e(1) = 1*6 + 0*8 = 6.
  REQUIRE(dec.exposures.size() == 2);
  CHECK(dec.exposures[0] == doctest::Approx(-1.0));
  CHECK(dec.exposures[1] == doctest::Approx(6.0));
  // Two rows cannot support a 1-regressor fit (needs js + 2 = 3).
  CHECK(std::isnan(dec.r_squared));
}

TEST_CASE("exposure r-squared reaches one on an exact linear relation") {
  const std::size_t nd = 12, ni = 5;
  auto weights = portfolio::make_weight_series(testutil::date_axis(nd),
                                               testutil::instrument_axis(ni));
  auto style = testutil::random_surface(nd, ni, 410);
  RngStream rng(411);
  for (auto& w : weights.weights) w = rng.normal() * 0.1;
  metrics::DateSeries rets;
  rets.dates = weights.dates;
  rets.values.assign(nd, 0.0);
  rets.mask.assign(nd, 1);
  const auto pre =
      combiner::exposure_decomposition(weights, {style}, {"s"}, rets);
  for (std::size_t d = 0; d < nd; ++d) {
    rets.values[d] = 0.003 + 2.0 * pre.exposures[d];
  }
  const auto dec =
      combiner::exposure_decomposition(weights, {style}, {"s"}, rets);
  CHECK(dec.r_squared == doctest::Approx(1.0).epsilon(1e-9));

  const auto none = combiner::exposure_decomposition(weights, {}, {}, rets);
  CHECK(std::isnan(none.r_squared));
  CHECK(none.exposures.empty());

  auto misaligned = portfolio::make_weight_series(testutil::date_axis(nd + 1),
                                                  testutil::instrument_axis(ni));
  CHECK_THROWS_AS((void)combiner::exposure_decomposition(misaligned, {style},
                                                         {"s"}, rets),
                  DataError);
}

TEST_CASE("model csv row works on raw factor values") {
  auto fx = make_fixture(12, 8, 420);
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 12, 0.3);
  const std::string csv = combiner::model_csv(model);
  const auto lines = split_lines(csv);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "intercept,f_a,f_b,f_c");
  const auto cells = split_csv(lines[1]);
  REQUIRE(cells.size() == 4);
  const double b0 = *parse_double(cells[0]);
  // Raw-scale row must reproduce predict() from unstandardized values.
  const auto p = combiner::predict(model, fx.factors, fx.ids);
  for (std::size_t d : {1ul, 7ul}) {
    for (std::size_t i : {0ul, 5ul}) {
      REQUIRE(p.mask[p.index(d, i)] == 1);
      double score = b0;
      for (std::size_t j = 0; j < 3; ++j) {
        score += *parse_double(cells[j + 1]) * fx.factors[j].at(d, i);
      }
      CHECK(score == doctest::Approx(p.values[p.index(d, i)]).epsilon(1e-10));
    }
  }
}

TEST_CASE("importance csv shape") {
  auto fx = make_fixture(10, 8, 430);
  const auto model = combiner::fit(fx.factors, fx.ids, fx.fwd, 0, 10, 1.0);
  const auto imp = combiner::permutation_importance(model, fx.factors, fx.ids,
                                                    fx.fwd, 2, 5);
  const auto lines = split_lines(combiner::importance_csv(imp));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "factor_id,mean_drop,std_drop");
  CHECK(split_csv(lines[1])[0] == "f_a");
  CHECK(split_csv(lines[3])[0] == "f_c");
}

TEST_SUITE_END();
