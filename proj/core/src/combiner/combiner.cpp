#include "alphadesk/combiner/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/common/parallel.hpp"
#include "alphadesk/common/rng.hpp"
#include "alphadesk/common/stats.hpp"

namespace alphadesk::combiner {

namespace {

void check_inputs(const std::vector<FactorMatrix>& factors,
                  const std::vector<std::string>& factor_ids,
                  const FactorMatrix* reference) {
  if (factors.empty()) throw DataError("combiner: factor list is empty");
  if (factors.size() != factor_ids.size()) {
    throw DataError("combiner: factor list and id list differ in length");
  }
  const FactorMatrix& ref = reference ? *reference : factors.front();
  for (const FactorMatrix& f : factors) {
    if (f.dates != ref.dates || f.instruments != ref.instruments) {
      throw DataError("alignment error: combiner inputs on different axes");
    }
  }
}

double standardized(const CombinerModel& model, std::size_t j, double x) {
  double sd = model.stds[static_cast<Eigen::Index>(j)];
  if (!(sd > 0.0)) return 0.0;
  return (x - model.means[static_cast<Eigen::Index>(j)]) / sd;
}

// Core of predict over an arbitrary factor set (used with one factor swapped
// out during permutation importance).
FactorMatrix predict_rows(const CombinerModel& model,
                          const std::vector<const FactorMatrix*>& factors) {
  const FactorMatrix& ref = *factors.front();
  FactorMatrix out = dsl::make_matrix(ref.dates, ref.instruments);
  std::size_t k = factors.size();
  for (std::size_t d = 0; d < ref.n_dates(); ++d) {
    for (std::size_t i = 0; i < ref.n_instruments(); ++i) {
      bool ok = true;
      double score = model.intercept;
      for (std::size_t j = 0; j < k; ++j) {
        if (!factors[j]->observed(d, i)) {
          ok = false;
          break;
        }
        score += model.coefficients[static_cast<Eigen::Index>(j)] *
                 standardized(model, j, factors[j]->at(d, i));
      }
      if (ok && std::isfinite(score)) {
        out.values[out.index(d, i)] = score;
        out.mask[out.index(d, i)] = 1;
      }
    }
  }
  return out;
}

// Mean of the observed per-date ICs (NaN when none are defined).
double mean_ic(const FactorMatrix& scores, const metrics::ForwardReturns& fwd,
               metrics::IcMethod method) {
  metrics::DateSeries ic = metrics::information_coefficient(scores, fwd, method);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t d = 0; d < ic.values.size(); ++d) {
    if (ic.mask[d]) {
      sum += ic.values[d];
      ++n;
    }
  }
  return n == 0 ? nan_value() : sum / static_cast<double>(n);
}

metrics::ForwardReturns slice_fwd(const metrics::ForwardReturns& fwd,
                                  std::size_t begin, std::size_t end) {
  metrics::ForwardReturns out;
  out.horizon = fwd.horizon;
  out.surface = dsl::slice_dates(fwd.surface, begin, end);
  return out;
}

std::vector<FactorMatrix> slice_factors(const std::vector<FactorMatrix>& factors,
                                        std::size_t begin, std::size_t end) {
  std::vector<FactorMatrix> out;
  out.reserve(factors.size());
  for (const FactorMatrix& f : factors) {
    out.push_back(dsl::slice_dates(f, begin, end));
  }
  return out;
}

std::string fmt_or_na(double v) {
  return std::isfinite(v) ? format_double(v) : "NA";
}

}  // namespace

CombinerModel fit(const std::vector<FactorMatrix>& factors,
                  const std::vector<std::string>& factor_ids,
                  const metrics::ForwardReturns& fwd, std::size_t window_begin,
                  std::size_t window_end, double lambda) {
  check_inputs(factors, factor_ids, &fwd.surface);
  if (!(lambda >= 0.0)) throw ConfigError("combiner: lambda must be >= 0");
  std::size_t nd = factors.front().n_dates();
  std::size_t ni = factors.front().n_instruments();
  if (window_begin > window_end || window_end > nd) {
    throw DataError("combiner: fit window outside the date range");
  }

  // Pool the rows where every factor and the forward return are observed.
  std::size_t k = factors.size();
  std::vector<std::size_t> row_d, row_i;
  for (std::size_t d = window_begin; d < window_end; ++d) {
    for (std::size_t i = 0; i < ni; ++i) {
      bool ok = fwd.surface.observed(d, i);
      for (std::size_t j = 0; ok && j < k; ++j) {
        ok = factors[j].observed(d, i);
      }
      if (ok) {
        row_d.push_back(d);
        row_i.push_back(i);
      }
    }
  }
  std::size_t m = row_d.size();
  if (m < k + 2) {
    throw DataError("combiner: fit window pools " + std::to_string(m) +
                    " rows; need at least " + std::to_string(k + 2));
  }

  CombinerModel model;
  model.factor_ids = factor_ids;
  model.lambda = lambda;
  model.fit_begin = window_begin;
  model.fit_end = window_end;
  model.means.resize(static_cast<Eigen::Index>(k));
  model.stds.resize(static_cast<Eigen::Index>(k));

  std::vector<double> column(m);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = 0; r < m; ++r) {
      column[r] = factors[j].at(row_d[r], row_i[r]);
    }
    bool constant = true;
    for (std::size_t r = 1; r < m; ++r) {
      if (column[r] != column[0]) {
        constant = false;
        break;
      }
    }
    model.means[static_cast<Eigen::Index>(j)] = mean(column);
    model.stds[static_cast<Eigen::Index>(j)] = constant ? 0.0 : sample_std(column);
  }

  Eigen::MatrixXd z(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  Eigen::VectorXd y(static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < m; ++r) {
    y[static_cast<Eigen::Index>(r)] = fwd.surface.at(row_d[r], row_i[r]);
    for (std::size_t j = 0; j < k; ++j) {
      double sd = model.stds[static_cast<Eigen::Index>(j)];
      double x = factors[j].at(row_d[r], row_i[r]);
      z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          sd > 0.0 ? (x - model.means[static_cast<Eigen::Index>(j)]) / sd : 0.0;
    }
  }
  model.intercept = y.mean();
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += lambda;
  Eigen::VectorXd rhs = z.transpose() * (y.array() - model.intercept).matrix();
  model.coefficients = gram.ldlt().solve(rhs);
  return model;
}

FactorMatrix predict(const CombinerModel& model,
                     const std::vector<FactorMatrix>& factors,
                     const std::vector<std::string>& factor_ids) {
  check_inputs(factors, factor_ids, nullptr);
  if (factor_ids != model.factor_ids) {
    throw DataError("combiner: factor ids do not match the fitted model");
  }
  std::vector<const FactorMatrix*> ptrs;
  ptrs.reserve(factors.size());
  for (const FactorMatrix& f : factors) ptrs.push_back(&f);
  return predict_rows(model, ptrs);
}

FactorMatrix rolling_fit_predict(const std::vector<FactorMatrix>& factors,
                                 const std::vector<std::string>& factor_ids,
                                 const metrics::ForwardReturns& fwd,
                                 const metrics::SplitPlan& plan,
                                 const std::vector<double>& lambda_grid) {
  check_inputs(factors, factor_ids, &fwd.surface);
  if (lambda_grid.empty()) {
    throw ConfigError("combiner: lambda grid must not be empty");
  }
  const FactorMatrix& ref = factors.front();
  FactorMatrix out = dsl::make_matrix(ref.dates, ref.instruments);
  for (const metrics::SplitWindow& w : plan.windows) {
    if (w.test_end > ref.n_dates()) {
      throw DataError("combiner: split window outside the date range");
    }
    // Select lambda on the validation range; ties keep the earlier entry.
    std::vector<FactorMatrix> valid_factors =
        slice_factors(factors, w.valid_begin, w.valid_end);
    metrics::ForwardReturns valid_fwd =
        slice_fwd(fwd, w.valid_begin, w.valid_end);
    CombinerModel best;
    double best_score = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (double lambda : lambda_grid) {
      CombinerModel model =
          fit(factors, factor_ids, fwd, w.train_begin, w.train_end, lambda);
      double score =
          mean_ic(predict(model, valid_factors, factor_ids), valid_fwd,
                  metrics::IcMethod::spearman);
      if (!have_best || (std::isfinite(score) && score > best_score)) {
        best = std::move(model);
        if (std::isfinite(score)) best_score = score;
        have_best = true;
      }
    }
    // Scores for the test range come from a model fit strictly on earlier
    // dates; copy them into the assembled surface.
    std::vector<FactorMatrix> test_factors =
        slice_factors(factors, w.test_begin, w.test_end);
    FactorMatrix scores = predict(best, test_factors, factor_ids);
    for (std::size_t d = w.test_begin; d < w.test_end; ++d) {
      for (std::size_t i = 0; i < ref.n_instruments(); ++i) {
        std::size_t src = scores.index(d - w.test_begin, i);
        if (scores.mask[src]) {
          out.values[out.index(d, i)] = scores.values[src];
          out.mask[out.index(d, i)] = 1;
        }
      }
    }
  }
  return out;
}

ImportanceReport permutation_importance(const CombinerModel& model,
                                        const std::vector<FactorMatrix>& factors,
                                        const std::vector<std::string>& factor_ids,
                                        const metrics::ForwardReturns& fwd,
                                        int repetitions, std::uint64_t seed,
                                        int workers) {
  check_inputs(factors, factor_ids, &fwd.surface);
  if (repetitions < 1) {
    throw ConfigError("combiner: importance repetitions must be >= 1");
  }
  if (factor_ids != model.factor_ids) {
    throw DataError("combiner: factor ids do not match the fitted model");
  }
  std::size_t k = factors.size();
  auto reps = static_cast<std::size_t>(repetitions);

  std::vector<const FactorMatrix*> base_ptrs;
  base_ptrs.reserve(k);
  for (const FactorMatrix& f : factors) base_ptrs.push_back(&f);
  double baseline =
      mean_ic(predict_rows(model, base_ptrs), fwd, metrics::IcMethod::spearman);

  // One task per (factor, repetition); each derives its own stream and writes
  // only its own slot, so worker count cannot change the report.
  std::vector<double> drops(k * reps, 0.0);
  RngStream root = RngStream(seed).derive("importance");
  parallel_for(k * reps, workers, [&](std::size_t task) {
    std::size_t j = task / reps;
    std::size_t r = task % reps;
    RngStream rng = root.derive(static_cast<std::uint64_t>(j))
                        .derive(static_cast<std::uint64_t>(r));
    FactorMatrix shuffled = factors[j];
    std::vector<std::size_t> slots;
    for (std::size_t d = 0; d < shuffled.n_dates(); ++d) {
      slots.clear();
      for (std::size_t i = 0; i < shuffled.n_instruments(); ++i) {
        if (shuffled.observed(d, i)) slots.push_back(shuffled.index(d, i));
      }
      for (std::size_t t = slots.size(); t > 1; --t) {
        std::size_t s = rng.uniform_int(t);
        std::swap(shuffled.values[slots[t - 1]], shuffled.values[slots[s]]);
      }
    }
    std::vector<const FactorMatrix*> ptrs = base_ptrs;
    ptrs[j] = &shuffled;
    double ic = mean_ic(predict_rows(model, ptrs), fwd,
                        metrics::IcMethod::spearman);
    drops[task] = baseline - ic;
  });

  ImportanceReport report;
  report.factor_ids = factor_ids;
  report.repetitions = repetitions;
  report.seed = seed;
  report.mean_drop.resize(k);
  report.std_drop.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> col(drops.begin() + static_cast<std::ptrdiff_t>(j * reps),
                            drops.begin() +
                                static_cast<std::ptrdiff_t>((j + 1) * reps));
    report.mean_drop[j] = mean(col);
    report.std_drop[j] = reps >= 2 ? sample_std(col) : 0.0;
  }
  return report;
}

ExposureDecomposition exposure_decomposition(
    const portfolio::WeightSeries& weights,
    const std::vector<FactorMatrix>& styles,
    const std::vector<std::string>& style_ids,
    const metrics::DateSeries& portfolio_returns) {
  if (styles.size() != style_ids.size()) {
    throw DataError("combiner: style list and id list differ in length");
  }
  for (const FactorMatrix& s : styles) {
    if (s.dates != weights.dates || s.instruments != weights.instruments) {
      throw DataError("alignment error: styles on different axes than weights");
    }
  }
  if (portfolio_returns.dates != weights.dates) {
    throw DataError("alignment error: returns on different dates than weights");
  }
  std::size_t nd = weights.n_dates(), ni = weights.n_instruments();
  std::size_t js = styles.size();

  ExposureDecomposition out;
  out.dates = weights.dates;
  out.style_ids = style_ids;
  out.exposures.assign(nd * js, 0.0);
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t j = 0; j < js; ++j) {
      double e = 0.0;
      for (std::size_t i = 0; i < ni; ++i) {
        if (styles[j].observed(d, i)) {
          e += weights.at(d, i) * styles[j].at(d, i);
        }
      }
      out.exposures[d * js + j] = e;
    }
  }

  // Share of return variance the exposures explain. Undefined (NaN) with no
  // styles, too few rows for the regressor count, or a constant target.
  out.r_squared = nan_value();
  if (js > 0) {
    std::vector<std::size_t> rows;
    for (std::size_t d = 0; d < nd; ++d) {
      if (portfolio_returns.mask[d]) rows.push_back(d);
    }
    std::size_t m = rows.size();
    if (m >= js + 2) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(m),
                        static_cast<Eigen::Index>(js + 1));
      Eigen::VectorXd y(static_cast<Eigen::Index>(m));
      for (std::size_t r = 0; r < m; ++r) {
        x(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (std::size_t j = 0; j < js; ++j) {
          x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j + 1)) =
              out.exposures[rows[r] * js + j];
        }
        y[static_cast<Eigen::Index>(r)] = portfolio_returns.values[rows[r]];
      }
      double sst = (y.array() - y.mean()).square().sum();
      if (sst > 0.0) {
        Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
        double ssr = (y - x * beta).squaredNorm();
        double r2 = 1.0 - ssr / sst;
        if (std::isfinite(r2)) out.r_squared = r2;
      }
    }
  }
  return out;
}

std::string model_csv(const CombinerModel& model) {
  std::string header = "intercept";
  for (const std::string& id : model.factor_ids) {
    header += ',' + id;
  }
  // Fold the standardization into raw-scale coefficients so the row applies
  // directly to unstandardized factor values.
  double b0 = model.intercept;
  std::string row;
  for (std::size_t j = 0; j < model.factor_ids.size(); ++j) {
    auto jj = static_cast<Eigen::Index>(j);
    double raw = 0.0;
    if (model.stds[jj] > 0.0) {
      raw = model.coefficients[jj] / model.stds[jj];
      b0 -= model.coefficients[jj] * model.means[jj] / model.stds[jj];
    }
    row += ',' + format_double(raw);
  }
  return header + '\n' + format_double(b0) + row + '\n';
}

std::string importance_csv(const ImportanceReport& report) {
  std::string out = "factor_id,mean_drop,std_drop\n";
  for (std::size_t j = 0; j < report.factor_ids.size(); ++j) {
    out += report.factor_ids[j];
    out += ',' + fmt_or_na(report.mean_drop[j]);
    out += ',' + fmt_or_na(report.std_drop[j]);
    out += '\n';
  }
  return out;
}

}  // namespace alphadesk::combiner
