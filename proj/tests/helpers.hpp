#pragma once

// Shared synthetic-data builders for the test suite. Everything here is
// seed-deterministic; no test reads the clock or the filesystem outside its
// own temp directory.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "alphadesk/common/rng.hpp"
#include "alphadesk/dsl/eval.hpp"
#include "alphadesk/panel/panel.hpp"

namespace testutil {

// Valid ISO-8601 date for index idx, strictly increasing: 28 days per month,
// 12 months per year, starting 2015-01-01.
inline std::string iso_date(int idx) {
  const int year = 2015 + idx / (12 * 28);
  const int month = (idx / 28) % 12 + 1;
  const int day = idx % 28 + 1;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

inline std::vector<std::string> date_axis(std::size_t n) {
  std::vector<std::string> dates;
  for (std::size_t d = 0; d < n; ++d) dates.push_back(iso_date(static_cast<int>(d)));
  return dates;
}

// Zero-padded instrument ids, already in sorted order.
inline std::vector<std::string> instrument_axis(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "I%04u", static_cast<unsigned>(i));
    out.emplace_back(buf);
  }
  return out;
}

// Dense random-walk panel over the given fields (default close + volume).
// `missing` masks that fraction of cells at random.
inline alphadesk::panel::PanelFrame random_panel(
    std::size_t n_instruments, std::size_t n_dates, std::uint64_t seed,
    std::vector<std::string> fields = {"close", "volume"}, double missing = 0.0) {
  alphadesk::panel::PanelFrame panel;
  panel.dates = date_axis(n_dates);
  panel.instruments = instrument_axis(n_instruments);
  std::sort(fields.begin(), fields.end());
  panel.fields = std::move(fields);
  panel.values.assign(n_dates * n_instruments * panel.fields.size(), 0.0);
  panel.mask.assign(panel.values.size(), 1);
  alphadesk::RngStream rng(seed);
  for (std::size_t i = 0; i < n_instruments; ++i) {
    for (std::size_t f = 0; f < panel.fields.size(); ++f) {
      double level = 100.0 + rng.uniform(-50.0, 50.0);
      for (std::size_t d = 0; d < n_dates; ++d) {
        level *= 1.0 + 0.02 * rng.normal();
        if (level < 1.0) level = 1.0;
        panel.values[panel.index(d, i, f)] = level;
        if (missing > 0.0 && rng.uniform01() < missing) panel.mask[panel.index(d, i, f)] = 0;
      }
    }
  }
  return panel;
}

// Fully observed random factor surface.
inline alphadesk::dsl::FactorMatrix random_surface(std::size_t n_dates,
                                                   std::size_t n_instruments,
                                                   std::uint64_t seed,
                                                   double missing = 0.0) {
  auto m = alphadesk::dsl::make_matrix(date_axis(n_dates), instrument_axis(n_instruments));
  alphadesk::RngStream rng(seed);
  for (std::size_t c = 0; c < m.values.size(); ++c) {
    m.values[c] = rng.normal();
    m.mask[c] = missing > 0.0 && rng.uniform01() < missing ? 0 : 1;
    if (!m.mask[c]) m.values[c] = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

}  // namespace testutil
