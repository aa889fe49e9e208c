#pragma once

#include <cstdint>
#include <vector>

namespace alphadesk::portfolio {

// Split a parent order into child quantities that sum exactly to the total.
// TWAP: equal real shares across `slices`. VWAP: proportional to the volume
// profile. Both round by largest remainder, ties to the earlier slice.
std::vector<std::int64_t> split_order_twap(std::int64_t total, int slices);
std::vector<std::int64_t> split_order_vwap(std::int64_t total,
                                           const std::vector<double>& profile);

}  // namespace alphadesk::portfolio
