#pragma once

#include <span>
#include <vector>

namespace civqr {

// Quantile with linear interpolation between order statistics (the default
// "type 7" rule of R's quantile()): position (n-1)p, linear blend of the two
// bracketing values.  p is clamped to [0,1]; the input need not be sorted.
// Throws std::invalid_argument on an empty input.
double quantile_type7(std::vector<double> values, double p);

double mean(std::span<const double> values);

}  // namespace civqr
