#include "civqr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace civqr {

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

}  // namespace civqr
