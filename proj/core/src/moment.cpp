#include "civqr/moment.hpp"

#include <cmath>
#include <stdexcept>

namespace civqr {

namespace {

// Componentwise a <= b over length-l slices of two flat arrays.
inline bool leq_all(const double* a, const double* b, std::size_t l) {
  for (std::size_t c = 0; c < l; ++c)
    if (a[c] > b[c]) return false;
  return true;
}

}  // namespace

MomentContext::MomentContext(const Dataset& data, const KmCurve& curve,
                             QuantileLevel u)
    : u_(u.value()) {
  require_valid(data);
  weights_.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data[i].delta) {
      bool clipped = false;
      weights_[i] = 1.0 / curve.eval(data[i].y, clipped);
      if (clipped) clipping_fired_ = true;
    } else {
      weights_[i] = 0.0;
    }
  }
  build(data);
}

MomentContext::MomentContext(const Dataset& data, QuantileLevel u)
    : u_(u.value()) {
  require_valid(data);
  weights_.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i)
    weights_[i] = data[i].delta ? 1.0 : 0.0;
  build(data);
}

void MomentContext::build(const Dataset& data) {
  n_ = data.n();
  k_ = data.k();
  l_ = data.l();

  w_flat_.resize(n_ * l_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t c = 0; c < l_; ++c) w_flat_[i * l_ + c] = data[i].w[c];

  std::size_t n_unc = 0;
  for (std::size_t i = 0; i < n_; ++i)
    if (data[i].delta) ++n_unc;
  unc_log_y_.reserve(n_unc);
  unc_weight_.reserve(n_unc);
  unc_z_flat_.reserve(n_unc * k_);
  col_offsets_.reserve(n_unc + 1);
  col_offsets_.push_back(0);

  count_leq_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* wi = &w_flat_[i * l_];
    const bool event = data[i].delta;
    for (std::size_t j = 0; j < n_; ++j) {
      if (leq_all(wi, &w_flat_[j * l_], l_)) {
        count_leq_[j] += 1.0;
        if (event) cols_.push_back(static_cast<std::uint32_t>(j));
      }
    }
    if (event) {
      col_offsets_.push_back(cols_.size());
      unc_row_.push_back(static_cast<std::uint32_t>(i));
      unc_log_y_.push_back(std::log(data[i].y));
      unc_weight_.push_back(weights_[i]);
      for (std::size_t c = 0; c < k_; ++c) unc_z_flat_.push_back(data[i].z[c]);
    }
  }
}

double MomentContext::moment(std::span<const double> beta,
                             std::span<const double> w) const {
  if (beta.size() != k_)
    throw std::invalid_argument("coefficient vector has wrong dimension");
  if (w.size() != l_)
    throw std::invalid_argument("instrument point has wrong dimension");

  double sum_weighted = 0.0;
  const std::size_t n_unc = unc_log_y_.size();
  for (std::size_t r = 0; r < n_unc; ++r) {
    const double* z = &unc_z_flat_[r * k_];
    double zb = 0.0;
    for (std::size_t c = 0; c < k_; ++c) zb += z[c] * beta[c];
    if (unc_log_y_[r] <= zb &&
        leq_all(&w_flat_[unc_row_[r] * l_], w.data(), l_))
      sum_weighted += unc_weight_[r];
  }
  double count_w = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    if (leq_all(&w_flat_[i * l_], w.data(), l_)) count_w += 1.0;
  return (sum_weighted - u_ * count_w) / static_cast<double>(n_);
}

double MomentContext::objective(std::span<const double> beta) const {
  if (beta.size() != k_)
    throw std::invalid_argument("coefficient vector has wrong dimension");

  thread_local std::vector<double> acc;
  acc.assign(n_, 0.0);

  const std::size_t n_unc = unc_log_y_.size();
  for (std::size_t r = 0; r < n_unc; ++r) {
    const double* z = &unc_z_flat_[r * k_];
    double zb = 0.0;
    for (std::size_t c = 0; c < k_; ++c) zb += z[c] * beta[c];
    if (unc_log_y_[r] <= zb) {
      const double wgt = unc_weight_[r];
      const std::size_t end = col_offsets_[r + 1];
      for (std::size_t p = col_offsets_[r]; p < end; ++p) acc[cols_[p]] += wgt;
    }
  }

  const double n = static_cast<double>(n_);
  double obj = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    const double a = (acc[j] - u_ * count_leq_[j]) / n;
    obj += a * a;
  }
  return obj / n;
}

}  // namespace civqr
