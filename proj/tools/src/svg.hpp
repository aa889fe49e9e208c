#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace alphadesk::cli {

// Minimal deterministic SVG line chart: one polyline over the sample index,
// breaking at unobserved points. Text-based and diffable on purpose; no
// styling knobs. `mask` may be null for fully observed series.
std::string line_chart(const std::string& title,
                       const std::vector<double>& values,
                       const std::vector<std::uint8_t>* mask);

}  // namespace alphadesk::cli
