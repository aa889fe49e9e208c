#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace alphadesk {

double mean(const std::vector<double>& xs);

// Sample standard deviation (n-1 denominator, the repo-wide convention).
// Requires xs.size() >= 2.
double sample_std(const std::vector<double>& xs);

// 0-based positions in ascending order; ties receive the mean of their
// positions. [3, 1, 2] -> [2, 0, 1]; [1, 1, 2] -> [0.5, 0.5, 2].
std::vector<double> ranks_mean_position(const std::vector<double>& xs);

// Pearson correlation clamped to [-1, 1]; nullopt when either side has zero
// variance or fewer than 2 points.
std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y);

}  // namespace alphadesk
