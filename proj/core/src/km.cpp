#include "civqr/km.hpp"

#include <algorithm>
#include <stdexcept>

namespace civqr {

double KmCurve::eval(double t, bool& clipped) const {
  clipped = false;
  // Last jump time <= t; before the first jump the curve is 1.
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  double value = 1.0;
  if (it != jump_times.begin())
    value = survival_after[static_cast<std::size_t>(it - jump_times.begin()) - 1];
  if (value < floor_epsilon) {
    clipped = true;
    return floor_epsilon;
  }
  return value;
}

KmCurve km_fit(const Dataset& data, double floor_epsilon) {
  require_valid(data);
  if (!(floor_epsilon > 0.0))
    throw std::invalid_argument("floor_epsilon must be positive");

  const std::size_t n = data.n();
  std::vector<std::pair<double, bool>> obs(n);  // (time, censored?)
  for (std::size_t i = 0; i < n; ++i) obs[i] = {data[i].y, !data[i].delta};
  std::sort(obs.begin(), obs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  KmCurve curve;
  curve.floor_epsilon = floor_epsilon;
  double surv = 1.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = obs[i].first;
    std::size_t at_risk = n - i;  // everyone with time >= t
    std::size_t d_cens = 0;
    while (i < n && obs[i].first == t) {
      if (obs[i].second) ++d_cens;
      ++i;
    }
    if (d_cens > 0) {
      surv *= 1.0 - static_cast<double>(d_cens) / static_cast<double>(at_risk);
      curve.jump_times.push_back(t);
      curve.survival_after.push_back(surv);
    }
  }
  return curve;
}

}  // namespace civqr
