#include "alphadesk/portfolio/execution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alphadesk/common/error.hpp"

namespace alphadesk::portfolio {

namespace {

std::vector<std::int64_t> largest_remainder(std::int64_t total,
                                            const std::vector<double>& profile) {
  std::size_t n = profile.size();
  double profile_sum = 0.0;
  for (double p : profile) {
    if (p < 0.0) throw DataError("split_order: volume profile entries must be >= 0");
    profile_sum += p;
  }
  if (profile_sum <= 0.0) {
    throw DataError("split_order: volume profile must not be all zero");
  }
  // Work on the magnitude; mirror the sign at the end so sells split the
  // same way buys do.
  std::int64_t magnitude = total < 0 ? -total : total;
  std::vector<std::int64_t> child(n, 0);
  std::vector<double> remainder(n, 0.0);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double exact = static_cast<double>(magnitude) * profile[i] / profile_sum;
    double base = std::floor(exact);
    child[i] = static_cast<std::int64_t>(base);
    remainder[i] = exact - base;
    assigned += child[i];
  }
  std::int64_t leftover = magnitude - assigned;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];  // stable: ties keep earlier slice first
  });
  for (std::int64_t k = 0; k < leftover; ++k) {
    child[order[static_cast<std::size_t>(k)]] += 1;
  }
  // Float guard: if a quotient rounded up across an integer boundary the
  // floors can over-assign; take the excess back from the smallest
  // remainders so the children always sum exactly to the parent.
  for (std::size_t k = n; leftover < 0 && k-- > 0;) {
    if (child[order[k]] > 0) {
      child[order[k]] -= 1;
      ++leftover;
    }
  }
  if (total < 0) {
    for (auto& c : child) c = -c;
  }
  return child;
}

}  // namespace

std::vector<std::int64_t> split_order_twap(std::int64_t total, int slices) {
  if (slices < 1) throw ConfigError("split_order: slices must be >= 1");
  return largest_remainder(total,
                           std::vector<double>(static_cast<std::size_t>(slices), 1.0));
}

std::vector<std::int64_t> split_order_vwap(std::int64_t total,
                                           const std::vector<double>& profile) {
  if (profile.empty()) throw ConfigError("split_order: volume profile must be nonempty");
  return largest_remainder(total, profile);
}

}  // namespace alphadesk::portfolio
