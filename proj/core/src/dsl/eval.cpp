#include "alphadesk/dsl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/dsl/registry.hpp"

namespace alphadesk::dsl {

namespace {

// Overflow guard: operators are total over finite inputs by construction
// (safe_* variants), but chained arithmetic can still overflow; a non-finite
// result becomes a masked cell rather than poisoning downstream statistics.
void set_cell(FactorMatrix& m, std::size_t idx, double v) {
  if (std::isfinite(v)) {
    m.values[idx] = v;
    m.mask[idx] = 1;
  } else {
    m.values[idx] = nan_value();
    m.mask[idx] = 0;
  }
}

// Ascending rank mapped affinely to [-1, +1]; ties get the mean of their
// 0-based positions; a single observation ranks 0. items are (value, slot)
// pairs; ranks land in out[slot].
void rank_to_unit(std::vector<std::pair<double, std::size_t>>& items,
                  std::vector<double>& out) {
  std::size_t n = items.size();
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && items[j + 1].first == items[i].first) ++j;
    double mean_pos = 0.5 * static_cast<double>(i + j);
    double r = n == 1 ? 0.0
                      : 2.0 * mean_pos / static_cast<double>(n - 1) - 1.0;
    for (std::size_t k = i; k <= j; ++k) out[items[k].second] = r;
    i = j + 1;
  }
}

// Rank of the newest window element among all w elements, same convention.
double trailing_rank(const double* window, std::size_t w) {
  double x = window[w - 1];
  std::size_t less = 0, eq = 0;
  for (std::size_t k = 0; k < w; ++k) {
    if (window[k] < x) ++less;
    else if (window[k] == x) ++eq;
  }
  double mean_pos = static_cast<double>(less) + 0.5 * static_cast<double>(eq - 1);
  return 2.0 * mean_pos / static_cast<double>(w - 1) - 1.0;
}

bool all_equal(const double* xs, std::size_t n) {
  for (std::size_t k = 1; k < n; ++k) {
    if (xs[k] != xs[0]) return false;
  }
  return true;
}

class Evaluator {
 public:
  Evaluator(const panel::PanelFrame& panel) : panel_(panel) {}

  FactorMatrix eval(const Expr& e) {
    switch (e.kind) {
      case NodeKind::constant: {
        FactorMatrix out = blank();
        std::fill(out.values.begin(), out.values.end(), e.value);
        std::fill(out.mask.begin(), out.mask.end(), std::uint8_t{1});
        return out;
      }
      case NodeKind::meta:
        return field_surface(e.name);
      default:
        break;
    }
    const OperatorInfo& info = OperatorRegistry::instance().at(e.name);
    switch (info.category) {
      case OpCategory::elementwise:
        return info.arity == 1 ? eval_unary(e) : eval_binary(e);
      case OpCategory::timeseries:
        return eval_timeseries(e, info);
      case OpCategory::cross_sectional:
        return e.name == "rank" ? eval_rank(eval(*e.children[0]))
                                : eval_zscore(eval(*e.children[0]));
      case OpCategory::group:
      case OpCategory::postprocess:
        if (e.name == "winsorize") return eval_winsorize(e);
        // group_rank, group_demean, neutralize (== demean within group)
        return eval_group(e);
    }
    throw InternalError("unhandled operator category for " + e.name);
  }

 private:
  FactorMatrix blank() const {
    return make_matrix(panel_.dates, panel_.instruments);
  }

  FactorMatrix field_surface(const std::string& field) const {
    auto f = panel_.field_index(field);
    if (!f) throw DataError("unknown field: " + field);
    FactorMatrix out = blank();
    for (std::size_t d = 0; d < panel_.n_dates(); ++d) {
      for (std::size_t i = 0; i < panel_.n_instruments(); ++i) {
        if (!panel_.observed(d, i, *f)) continue;
        set_cell(out, out.index(d, i), panel_.at(d, i, *f));
      }
    }
    return out;
  }

  FactorMatrix eval_unary(const Expr& e) {
    FactorMatrix x = eval(*e.children[0]);
    FactorMatrix out = blank();
    for (std::size_t idx = 0; idx < x.values.size(); ++idx) {
      if (!x.mask[idx]) continue;
      double v = x.values[idx];
      double r;
      if (e.name == "neg") r = -v;
      else if (e.name == "abs") r = std::abs(v);
      else if (e.name == "sign") r = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      else if (e.name == "safe_sqrt") r = std::copysign(std::sqrt(std::abs(v)), v);
      else if (e.name == "safe_log") r = std::copysign(std::log1p(std::abs(v)), v);
      else throw InternalError("unhandled unary operator " + e.name);
      set_cell(out, idx, r);
    }
    return out;
  }

  FactorMatrix eval_binary(const Expr& e) {
    FactorMatrix a = eval(*e.children[0]);
    FactorMatrix b = eval(*e.children[1]);
    FactorMatrix out = blank();
    for (std::size_t idx = 0; idx < a.values.size(); ++idx) {
      if (!a.mask[idx] || !b.mask[idx]) continue;
      double x = a.values[idx], y = b.values[idx];
      double r;
      if (e.name == "add") r = x + y;
      else if (e.name == "sub") r = x - y;
      else if (e.name == "mul") r = x * y;
      else if (e.name == "safe_div") {
        if (std::abs(y) < 1e-12) continue;  // masked: denominator too small
        r = x / y;
      } else {
        throw InternalError("unhandled binary operator " + e.name);
      }
      set_cell(out, idx, r);
    }
    return out;
  }

  FactorMatrix eval_timeseries(const Expr& e, const OperatorInfo& info) {
    auto w = static_cast<std::size_t>(e.param.window);
    FactorMatrix x = eval(*e.children[0]);
    FactorMatrix y;  // ts_corr only
    if (info.arity == 2) y = eval(*e.children[1]);
    FactorMatrix out = blank();
    std::size_t nd = out.n_dates(), ni = out.n_instruments();
    std::vector<double> xs(nd), ys(nd);
    std::vector<std::uint8_t> ok(nd);
    for (std::size_t i = 0; i < ni; ++i) {
      for (std::size_t d = 0; d < nd; ++d) {
        std::size_t idx = x.index(d, i);
        xs[d] = x.values[idx];
        ok[d] = x.mask[idx];
        if (info.arity == 2) {
          ys[d] = y.values[idx];
          ok[d] = static_cast<std::uint8_t>(ok[d] && y.mask[idx]);
        }
      }
      // run[d]: consecutive fully-observed dates ending at d.
      std::size_t run = 0;
      for (std::size_t d = 0; d < nd; ++d) {
        run = ok[d] ? run + 1 : 0;
        if (run < w) continue;
        const double* win_x = &xs[d + 1 - w];
        double r;
        if (e.name == "ts_mean") {
          double s = 0.0;
          for (std::size_t k = 0; k < w; ++k) s += win_x[k];
          r = s / static_cast<double>(w);
        } else if (e.name == "ts_std") {
          double s = 0.0;
          for (std::size_t k = 0; k < w; ++k) s += win_x[k];
          double mean = s / static_cast<double>(w);
          double ss = 0.0;
          for (std::size_t k = 0; k < w; ++k) {
            double dx = win_x[k] - mean;
            ss += dx * dx;
          }
          r = std::sqrt(ss / static_cast<double>(w - 1));
        } else if (e.name == "ts_delta") {
          r = win_x[w - 1] - win_x[0];
        } else if (e.name == "ts_rank") {
          r = trailing_rank(win_x, w);
        } else if (e.name == "ts_max") {
          r = *std::max_element(win_x, win_x + w);
        } else if (e.name == "ts_min") {
          r = *std::min_element(win_x, win_x + w);
        } else if (e.name == "decay_linear") {
          // weights 1..w oldest..newest, normalized; newest weighted heaviest
          double s = 0.0;
          for (std::size_t k = 0; k < w; ++k) s += win_x[k] * static_cast<double>(k + 1);
          r = s * 2.0 / (static_cast<double>(w) * static_cast<double>(w + 1));
        } else if (e.name == "ts_corr") {
          const double* win_y = &ys[d + 1 - w];
          if (all_equal(win_x, w) || all_equal(win_y, w)) continue;  // undefined
          double mx = 0.0, my = 0.0;
          for (std::size_t k = 0; k < w; ++k) {
            mx += win_x[k];
            my += win_y[k];
          }
          mx /= static_cast<double>(w);
          my /= static_cast<double>(w);
          double sxy = 0.0, sxx = 0.0, syy = 0.0;
          for (std::size_t k = 0; k < w; ++k) {
            double dx = win_x[k] - mx, dy = win_y[k] - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
          }
          if (sxx <= 0.0 || syy <= 0.0) continue;
          r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
        } else {
          throw InternalError("unhandled timeseries operator " + e.name);
        }
        set_cell(out, out.index(d, i), r);
      }
    }
    return out;
  }

  FactorMatrix eval_rank(const FactorMatrix& x) {
    FactorMatrix out = make_matrix(x.dates, x.instruments);
    std::size_t ni = x.n_instruments();
    std::vector<std::pair<double, std::size_t>> items;
    std::vector<double> ranks(ni);
    for (std::size_t d = 0; d < x.n_dates(); ++d) {
      items.clear();
      for (std::size_t i = 0; i < ni; ++i) {
        if (x.observed(d, i)) items.emplace_back(x.at(d, i), i);
      }
      if (items.empty()) continue;
      rank_to_unit(items, ranks);
      for (std::size_t i = 0; i < ni; ++i) {
        if (x.observed(d, i)) set_cell(out, out.index(d, i), ranks[i]);
      }
    }
    return out;
  }

  FactorMatrix eval_zscore(const FactorMatrix& x) {
    FactorMatrix out = make_matrix(x.dates, x.instruments);
    std::size_t ni = x.n_instruments();
    std::vector<double> vals;
    for (std::size_t d = 0; d < x.n_dates(); ++d) {
      vals.clear();
      for (std::size_t i = 0; i < ni; ++i) {
        if (x.observed(d, i)) vals.push_back(x.at(d, i));
      }
      // degenerate cross-section carries no ranking information: masked
      if (vals.size() < 2 || all_equal(vals.data(), vals.size())) continue;
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
      if (sd <= 0.0) continue;
      for (std::size_t i = 0; i < ni; ++i) {
        if (x.observed(d, i)) {
          set_cell(out, out.index(d, i), (x.at(d, i) - mean) / sd);
        }
      }
    }
    return out;
  }

  FactorMatrix eval_winsorize(const Expr& e) {
    FactorMatrix x = eval(*e.children[0]);
    double p = e.param.fraction;
    FactorMatrix out = make_matrix(x.dates, x.instruments);
    std::size_t ni = x.n_instruments();
    std::vector<double> vals;
    for (std::size_t d = 0; d < x.n_dates(); ++d) {
      vals.clear();
      for (std::size_t i = 0; i < ni; ++i) {
        if (x.observed(d, i)) vals.push_back(x.at(d, i));
      }
      if (vals.empty()) continue;
      std::sort(vals.begin(), vals.end());
      double lo = panel::nearest_rank_quantile(vals, p);
      double hi = panel::nearest_rank_quantile(vals, 1.0 - p);
      for (std::size_t i = 0; i < ni; ++i) {
        if (x.observed(d, i)) {
          set_cell(out, out.index(d, i), std::clamp(x.at(d, i), lo, hi));
        }
      }
    }
    return out;
  }

  // group_rank / group_demean / neutralize: partition each date's observed
  // cells by the group field's value and rank or demean within each part.
  FactorMatrix eval_group(const Expr& e) {
    FactorMatrix x = eval(*e.children[0]);
    auto g = panel_.field_index(e.param.group);
    if (!g) throw DataError("unknown field: " + e.param.group);
    bool want_rank = e.name == "group_rank";
    FactorMatrix out = make_matrix(x.dates, x.instruments);
    std::size_t ni = x.n_instruments();
    std::vector<double> ranks(ni);
    for (std::size_t d = 0; d < x.n_dates(); ++d) {
      std::map<double, std::vector<std::size_t>> parts;
      for (std::size_t i = 0; i < ni; ++i) {
        if (x.observed(d, i) && panel_.observed(d, i, *g)) {
          parts[panel_.at(d, i, *g)].push_back(i);
        }
      }
      for (auto& [key, members] : parts) {
        (void)key;
        if (want_rank) {
          std::vector<std::pair<double, std::size_t>> items;
          items.reserve(members.size());
          for (std::size_t i : members) items.emplace_back(x.at(d, i), i);
          rank_to_unit(items, ranks);
          for (std::size_t i : members) set_cell(out, out.index(d, i), ranks[i]);
        } else {
          double mean = 0.0;
          for (std::size_t i : members) mean += x.at(d, i);
          mean /= static_cast<double>(members.size());
          for (std::size_t i : members) {
            set_cell(out, out.index(d, i), x.at(d, i) - mean);
          }
        }
      }
    }
    return out;
  }

  const panel::PanelFrame& panel_;
};

}  // namespace

FactorMatrix make_matrix(std::vector<std::string> dates,
                         std::vector<std::string> instruments) {
  FactorMatrix out;
  out.dates = std::move(dates);
  out.instruments = std::move(instruments);
  out.values.assign(out.dates.size() * out.instruments.size(), nan_value());
  out.mask.assign(out.values.size(), 0);
  return out;
}

FactorMatrix slice_dates(const FactorMatrix& m, std::size_t begin,
                         std::size_t end) {
  if (begin > end || end > m.n_dates()) {
    throw InternalError("slice_dates: bad range");
  }
  FactorMatrix out;
  out.dates.assign(m.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   m.dates.begin() + static_cast<std::ptrdiff_t>(end));
  out.instruments = m.instruments;
  std::size_t ni = m.n_instruments();
  out.values.assign(m.values.begin() + static_cast<std::ptrdiff_t>(begin * ni),
                    m.values.begin() + static_cast<std::ptrdiff_t>(end * ni));
  out.mask.assign(m.mask.begin() + static_cast<std::ptrdiff_t>(begin * ni),
                  m.mask.begin() + static_cast<std::ptrdiff_t>(end * ni));
  return out;
}

FactorMatrix evaluate(const Expr& expr, const panel::PanelFrame& panel,
                      const EvalOptions& opts) {
  std::size_t dep = depth(expr);
  if (dep > opts.max_depth) {
    throw DomainError("expression depth " + std::to_string(dep) +
                      " exceeds cap " + std::to_string(opts.max_depth));
  }
  std::size_t nodes = node_count(expr);
  if (nodes > opts.max_nodes) {
    throw DomainError("expression node count " + std::to_string(nodes) +
                      " exceeds cap " + std::to_string(opts.max_nodes));
  }
  return Evaluator(panel).eval(expr);
}

}  // namespace alphadesk::dsl
