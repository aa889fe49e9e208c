#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alphadesk/dsl/expr.hpp"
#include "alphadesk/panel/panel.hpp"

namespace alphadesk::dsl {

// Evaluated factor surface: one value per (date, instrument), row-major by
// date. Masked-false cells must never be read, compared, or correlated.
struct FactorMatrix {
  std::vector<std::string> dates;
  std::vector<std::string> instruments;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  std::size_t n_dates() const { return dates.size(); }
  std::size_t n_instruments() const { return instruments.size(); }
  std::size_t index(std::size_t d, std::size_t i) const {
    return d * instruments.size() + i;
  }
  bool observed(std::size_t d, std::size_t i) const { return mask[index(d, i)] != 0; }
  double at(std::size_t d, std::size_t i) const { return values[index(d, i)]; }
};

// All-masked surface on the given axes.
FactorMatrix make_matrix(std::vector<std::string> dates,
                         std::vector<std::string> instruments);

// Copy of the date range [begin, end); instruments unchanged.
FactorMatrix slice_dates(const FactorMatrix& m, std::size_t begin,
                         std::size_t end);

struct EvalOptions {
  std::size_t max_depth = 8;
  std::size_t max_nodes = 64;
};

// Pure function of (expr, panel): at date t the output depends only on panel
// rows with date <= t. Mask propagation: elementwise/binary outputs are
// masked where any input cell is masked; window operators require the full
// w-date window observed; cross-sectional/group operators keep each cell's
// own mask and compute over the observed subset.
FactorMatrix evaluate(const Expr& expr, const panel::PanelFrame& panel,
                      const EvalOptions& opts = {});
inline FactorMatrix evaluate(const ExprPtr& expr, const panel::PanelFrame& panel,
                             const EvalOptions& opts = {}) {
  return evaluate(*expr, panel, opts);
}

}  // namespace alphadesk::dsl
