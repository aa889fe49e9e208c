#include "svg.hpp"

#include <algorithm>
#include <cmath>

#include "alphadesk/common/num.hpp"

namespace alphadesk::cli {

namespace {

constexpr double kWidth = 800.0, kHeight = 400.0, kPad = 50.0;

// Two decimals are plenty for plot coordinates and keep the file short while
// staying byte-deterministic.
std::string coord(double v) {
  return format_double(std::round(v * 100.0) / 100.0);
}

}  // namespace

std::string line_chart(const std::string& title,
                       const std::vector<double>& values,
                       const std::vector<std::uint8_t>* mask) {
  std::size_t n = values.size();
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    if (!std::isfinite(values[i])) continue;
    if (!any) {
      lo = hi = values[i];
      any = true;
    } else {
      lo = std::min(lo, values[i]);
      hi = std::max(hi, values[i]);
    }
  }
  if (!any) lo = 0.0, hi = 1.0;
  if (hi == lo) {
    lo -= 1.0;
    hi += 1.0;
  }

  double span_x = kWidth - 2.0 * kPad, span_y = kHeight - 2.0 * kPad;
  auto x_at = [&](std::size_t i) {
    double t = n <= 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    return kPad + t * span_x;
  };
  auto y_at = [&](double v) {
    return kHeight - kPad - (v - lo) / (hi - lo) * span_y;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         coord(kWidth) + " " + coord(kHeight) + "\">\n";
  out += "<rect width=\"" + coord(kWidth) + "\" height=\"" + coord(kHeight) +
         "\" fill=\"white\"/>\n";
  out += "<text x=\"" + coord(kWidth / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"16\">" +
         title + "</text>\n";
  // axes
  out += "<line x1=\"" + coord(kPad) + "\" y1=\"" + coord(kPad) + "\" x2=\"" +
         coord(kPad) + "\" y2=\"" + coord(kHeight - kPad) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + coord(kPad) + "\" y1=\"" + coord(kHeight - kPad) +
         "\" x2=\"" + coord(kWidth - kPad) + "\" y2=\"" +
         coord(kHeight - kPad) + "\" stroke=\"black\"/>\n";
  out += "<text x=\"" + coord(kPad - 6.0) + "\" y=\"" + coord(kPad + 4.0) +
         "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">" +
         format_double(hi) + "</text>\n";
  out += "<text x=\"" + coord(kPad - 6.0) + "\" y=\"" +
         coord(kHeight - kPad + 4.0) +
         "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">" +
         format_double(lo) + "</text>\n";

  // polyline segments, broken wherever a point is unobserved or non-finite
  std::string points;
  auto flush = [&]() {
    if (points.empty()) return;
    out += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" "
           "points=\"" +
           points + "\"/>\n";
    points.clear();
  };
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = (mask == nullptr || (*mask)[i]) && std::isfinite(values[i]);
    if (!ok) {
      flush();
      continue;
    }
    if (!points.empty()) points += ' ';
    points += coord(x_at(i)) + "," + coord(y_at(values[i]));
  }
  flush();
  out += "</svg>\n";
  return out;
}

}  // namespace alphadesk::cli
