#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alphadesk::panel {

/// Dense 3-axis market-data panel: dates x instruments x fields, doubles plus
/// an observation mask. Dates are ISO-8601 strings and strictly increasing;
/// instruments and fields are unique and sorted. Cells with mask false hold a
/// quiet NaN sentinel that no computation may read directly — every consumer
/// goes through the mask.
///
/// A PanelFrame is immutable after construction; preprocessing returns new
/// frames, so panels are safe to share across threads.
struct PanelFrame {
  std::vector<std::string> dates;
  std::vector<std::string> instruments;
  std::vector<std::string> fields;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  std::size_t n_dates() const { return dates.size(); }
  std::size_t n_instruments() const { return instruments.size(); }
  std::size_t n_fields() const { return fields.size(); }

  std::size_t index(std::size_t d, std::size_t i, std::size_t f) const {
    return (d * instruments.size() + i) * fields.size() + f;
  }
  bool observed(std::size_t d, std::size_t i, std::size_t f) const {
    return mask[index(d, i, f)] != 0;
  }
  double at(std::size_t d, std::size_t i, std::size_t f) const {
    return values[index(d, i, f)];
  }

  std::optional<std::size_t> field_index(const std::string& name) const;
  std::optional<std::size_t> instrument_index(const std::string& name) const;
  std::optional<std::size_t> date_index(const std::string& date) const;

  /// Copy restricted to the first n_keep dates. Used by the no-lookahead
  /// truncation tests and by nothing on the hot path.
  PanelFrame truncated(std::size_t n_keep) const;
};

/// One observed cell of long-format input.
struct PanelCell {
  std::string date;
  std::string instrument;
  std::string field;
  double value = 0.0;
  bool observed = true;
};

/// Builds a frame from cells. Axes become the sorted union of what was seen;
/// anything not mentioned stays masked. Duplicate (date,instrument,field)
/// keys are an error.
PanelFrame make_panel(const std::vector<PanelCell>& cells);

/// Reads a long-format CSV with header `date,instrument,field,value`.
/// Dates must be ISO-8601 (YYYY-MM-DD); value is a decimal float or the
/// literal NA for a recorded-but-missing cell. Errors carry line numbers.
PanelFrame load_panel(const std::string& path);

/// Serializes back to the long format, rows sorted by (date, instrument,
/// field). With emit_na true, masked cells appear as NA rows; otherwise they
/// are omitted.
std::string panel_to_csv(const PanelFrame& panel, bool emit_na);

/// How a raw panel is cleaned before anything downstream sees it.
struct PreprocessSpec {
  enum class Impute { none, forward_fill };
  enum class Standardize { none, zscore_cross_section };
  Impute impute = Impute::none;
  int max_gap = 0;           // forward_fill: longest bridgeable gap, in periods
  double winsorize_p = 0.0;  // in [0, 0.5)
  Standardize standardize = Standardize::none;
};

/// Fills each masked cell from the most recent observed value of the same
/// (instrument, field), at most max_gap periods back. Nothing is ever filled
/// from a later date.
PanelFrame forward_fill(const PanelFrame& panel, int max_gap);

/// Clips one field's observed cross-section per date to the nearest-rank
/// quantiles [Q(p), Q(1-p)]. Mask unchanged.
PanelFrame winsorize_cross_section(const PanelFrame& panel,
                                   const std::string& field, double p);

/// Replaces one field's observed cross-section per date by
/// (x - mean) / sample std. A date with fewer than two observations or zero
/// variance is masked out entirely for that field: a constant cross-section
/// carries no ranking information.
PanelFrame zscore_cross_section(const PanelFrame& panel,
                                const std::string& field);

/// Applies impute -> winsorize -> standardize in that order over the given
/// numeric fields (group/categorical fields must be excluded by the caller so
/// their codes survive intact).
PanelFrame preprocess(const PanelFrame& panel, const PreprocessSpec& spec,
                      const std::vector<std::string>& numeric_fields);

/// Nearest-rank quantile: the ceil(p*n)-th order statistic (1-indexed) of the
/// sorted values; p = 0 gives the minimum. `sorted` must be nonempty and
/// ascending.
double nearest_rank_quantile(const std::vector<double>& sorted, double p);

}  // namespace alphadesk::panel
