#include "alphadesk/panel/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/io.hpp"
#include "alphadesk/common/num.hpp"

namespace alphadesk::panel {

namespace {

bool valid_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  int month = (s[5] - '0') * 10 + (s[6] - '0');
  int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::optional<std::size_t> find_sorted(const std::vector<std::string>& axis,
                                       const std::string& key) {
  auto it = std::lower_bound(axis.begin(), axis.end(), key);
  if (it == axis.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - axis.begin());
}

}  // namespace

std::optional<std::size_t> PanelFrame::field_index(const std::string& name) const {
  return find_sorted(fields, name);
}

std::optional<std::size_t> PanelFrame::instrument_index(const std::string& name) const {
  return find_sorted(instruments, name);
}

std::optional<std::size_t> PanelFrame::date_index(const std::string& date) const {
  return find_sorted(dates, date);
}

PanelFrame PanelFrame::truncated(std::size_t n_keep) const {
  n_keep = std::min(n_keep, dates.size());
  PanelFrame out;
  out.dates.assign(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(n_keep));
  out.instruments = instruments;
  out.fields = fields;
  std::size_t row = instruments.size() * fields.size();
  out.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n_keep * row));
  out.mask.assign(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n_keep * row));
  return out;
}

PanelFrame make_panel(const std::vector<PanelCell>& cells) {
  if (cells.empty()) {
    throw DataError("empty input: no panel cells");
  }
  std::set<std::string> date_set, instrument_set, field_set;
  for (const auto& c : cells) {
    date_set.insert(c.date);
    instrument_set.insert(c.instrument);
    field_set.insert(c.field);
  }
  PanelFrame out;
  out.dates.assign(date_set.begin(), date_set.end());
  out.instruments.assign(instrument_set.begin(), instrument_set.end());
  out.fields.assign(field_set.begin(), field_set.end());
  out.values.assign(out.dates.size() * out.instruments.size() * out.fields.size(),
                    nan_value());
  out.mask.assign(out.values.size(), 0);

  std::unordered_set<std::size_t> seen;
  seen.reserve(cells.size());
  for (const auto& c : cells) {
    std::size_t d = *out.date_index(c.date);
    std::size_t i = *out.instrument_index(c.instrument);
    std::size_t f = *out.field_index(c.field);
    std::size_t idx = out.index(d, i, f);
    if (!seen.insert(idx).second) {
      throw DataError("duplicate record: (" + c.date + ", " + c.instrument +
                      ", " + c.field + ")");
    }
    if (c.observed) {
      out.values[idx] = c.value;
      out.mask[idx] = 1;
    }
  }
  return out;
}

PanelFrame load_panel(const std::string& path) {
  std::string text = read_file(path);
  auto lines = split_lines(text);
  if (lines.empty()) {
    throw DataError(path + ": empty input");
  }
  if (lines[0] != "date,instrument,field,value") {
    throw DataError(path + ":1: expected header `date,instrument,field,value`, got `" +
                    lines[0] + "`");
  }
  std::vector<PanelCell> cells;
  cells.reserve(lines.size() - 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    auto cols = split_csv(line);
    std::string where = path + ":" + std::to_string(ln + 1) + ": ";
    if (cols.size() != 4) {
      throw DataError(where + "expected 4 columns, got " + std::to_string(cols.size()));
    }
    if (!valid_iso_date(cols[0])) {
      throw DataError(where + "bad ISO-8601 date `" + cols[0] + "`");
    }
    if (cols[1].empty() || cols[2].empty()) {
      throw DataError(where + "empty instrument or field");
    }
    PanelCell cell;
    cell.date = cols[0];
    cell.instrument = cols[1];
    cell.field = cols[2];
    if (cols[3] == "NA") {
      cell.observed = false;
    } else {
      auto v = parse_double(cols[3]);
      if (!v || !std::isfinite(*v)) {
        throw DataError(where + "bad value `" + cols[3] + "`");
      }
      cell.value = *v;
    }
    cells.push_back(std::move(cell));
  }
  if (cells.empty()) {
    throw DataError(path + ": empty input (header only)");
  }
  try {
    return make_panel(cells);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string panel_to_csv(const PanelFrame& panel, bool emit_na) {
  std::string out = "date,instrument,field,value\n";
  for (std::size_t d = 0; d < panel.n_dates(); ++d) {
    for (std::size_t i = 0; i < panel.n_instruments(); ++i) {
      for (std::size_t f = 0; f < panel.n_fields(); ++f) {
        bool obs = panel.observed(d, i, f);
        if (!obs && !emit_na) continue;
        out += panel.dates[d];
        out += ',';
        out += panel.instruments[i];
        out += ',';
        out += panel.fields[f];
        out += ',';
        out += obs ? format_double(panel.at(d, i, f)) : "NA";
        out += '\n';
      }
    }
  }
  return out;
}

PanelFrame forward_fill(const PanelFrame& panel, int max_gap) {
  if (max_gap < 0) {
    throw ConfigError("forward_fill: max_gap must be >= 0");
  }
  PanelFrame out = panel;
  std::size_t nd = panel.n_dates();
  for (std::size_t i = 0; i < panel.n_instruments(); ++i) {
    for (std::size_t f = 0; f < panel.n_fields(); ++f) {
      std::ptrdiff_t last_seen = -1;
      for (std::size_t d = 0; d < nd; ++d) {
        std::size_t idx = panel.index(d, i, f);
        if (panel.mask[idx]) {
          last_seen = static_cast<std::ptrdiff_t>(d);
          continue;
        }
        if (last_seen >= 0 &&
            static_cast<std::ptrdiff_t>(d) - last_seen <= max_gap) {
          out.values[idx] = panel.at(static_cast<std::size_t>(last_seen), i, f);
          out.mask[idx] = 1;
        }
      }
    }
  }
  return out;
}

double nearest_rank_quantile(const std::vector<double>& sorted, double p) {
  std::size_t n = sorted.size();
  double exact = p * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(exact));
  if (k < 1) k = 1;
  if (k > n) k = n;
  return sorted[k - 1];
}

PanelFrame winsorize_cross_section(const PanelFrame& panel,
                                   const std::string& field, double p) {
  if (!(p >= 0.0 && p < 0.5)) {
    throw ConfigError("winsorize: p must be in [0, 0.5)");
  }
  auto f_opt = panel.field_index(field);
  if (!f_opt) {
    throw DataError("winsorize: field not found: " + field);
  }
  std::size_t f = *f_opt;
  PanelFrame out = panel;
  std::vector<double> observed;
  for (std::size_t d = 0; d < panel.n_dates(); ++d) {
    observed.clear();
    for (std::size_t i = 0; i < panel.n_instruments(); ++i) {
      if (panel.observed(d, i, f)) observed.push_back(panel.at(d, i, f));
    }
    if (observed.empty()) continue;
    std::sort(observed.begin(), observed.end());
    double lo = nearest_rank_quantile(observed, p);
    double hi = nearest_rank_quantile(observed, 1.0 - p);
    for (std::size_t i = 0; i < panel.n_instruments(); ++i) {
      std::size_t idx = panel.index(d, i, f);
      if (!panel.mask[idx]) continue;
      out.values[idx] = std::clamp(panel.values[idx], lo, hi);
    }
  }
  return out;
}

PanelFrame zscore_cross_section(const PanelFrame& panel,
                                const std::string& field) {
  auto f_opt = panel.field_index(field);
  if (!f_opt) {
    throw DataError("zscore: field not found: " + field);
  }
  std::size_t f = *f_opt;
  PanelFrame out = panel;
  for (std::size_t d = 0; d < panel.n_dates(); ++d) {
    std::vector<std::size_t> idxs;
    double sum = 0.0;
    for (std::size_t i = 0; i < panel.n_instruments(); ++i) {
      std::size_t idx = panel.index(d, i, f);
      if (panel.mask[idx]) {
        idxs.push_back(idx);
        sum += panel.values[idx];
      }
    }
    std::size_t n = idxs.size();
    if (n == 0) continue;
    bool constant_section = true;
    for (std::size_t idx : idxs) {
      if (panel.values[idx] != panel.values[idxs[0]]) {
        constant_section = false;
        break;
      }
    }
    if (n < 2 || constant_section) {
      // zero variance carries no ranking information: mask the date out
      for (std::size_t idx : idxs) {
        out.values[idx] = nan_value();
        out.mask[idx] = 0;
      }
      continue;
    }
    double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t idx : idxs) {
      double dchi = panel.values[idx] - mean;
      ss += dchi * dchi;
    }
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    for (std::size_t idx : idxs) {
      out.values[idx] = (panel.values[idx] - mean) / sd;
    }
  }
  return out;
}

PanelFrame preprocess(const PanelFrame& panel, const PreprocessSpec& spec,
                      const std::vector<std::string>& numeric_fields) {
  if (!(spec.winsorize_p >= 0.0 && spec.winsorize_p < 0.5)) {
    throw ConfigError("preprocess: winsorize_p must be in [0, 0.5)");
  }
  if (spec.max_gap < 0) {
    throw ConfigError("preprocess: max_gap must be >= 0");
  }
  PanelFrame out = panel;
  if (spec.impute == PreprocessSpec::Impute::forward_fill) {
    out = forward_fill(out, spec.max_gap);
  }
  if (spec.winsorize_p > 0.0) {
    for (const auto& f : numeric_fields) {
      out = winsorize_cross_section(out, f, spec.winsorize_p);
    }
  }
  if (spec.standardize == PreprocessSpec::Standardize::zscore_cross_section) {
    for (const auto& f : numeric_fields) {
      out = zscore_cross_section(out, f);
    }
  }
  return out;
}

}  // namespace alphadesk::panel
