#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "civqr/km.hpp"
#include "civqr/model.hpp"

namespace civqr {

// Sample moment machinery for one quantile level.
//
// For a coefficient vector b and an instrument point w, the sample moment is
//
//   A(b, w) = (1/n) sum_i [delta_i / G(y_i)] 1{y_i <= exp(z_i'b), w_i <= w}
//           - (u/n) sum_i 1{w_i <= w},
//
// where G is the censoring survival curve and "<=" between instrument vectors
// holds componentwise.  The estimation objective averages the squared moment
// over the observed instrument points: (1/n) sum_j A(b, w_j)^2.
//
// Construction precomputes the censoring weights, log durations, and for each
// uncensored row i the list of sample points j with w_i <= w_j, so that one
// objective evaluation costs roughly (active rows) x (mean list length)
// additions instead of n^2 vector comparisons.  The duration indicator is
// evaluated in log space, log y_i <= z_i'b, to avoid overflow in exp.
class MomentContext {
 public:
  // Censoring-weighted form: weights are delta_i / G(y_i) with G evaluated at
  // the row's own duration; clipped evaluations set the clipping flag.
  MomentContext(const Dataset& data, const KmCurve& curve, QuantileLevel u);

  // Unweighted form (weights are exactly the event indicators); coincides
  // with the censoring-weighted form when no row is censored.
  MomentContext(const Dataset& data, QuantileLevel u);

  double u() const { return u_; }
  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t l() const { return l_; }
  const std::vector<double>& weights() const { return weights_; }
  bool clipping_fired() const { return clipping_fired_; }

  // A(b, w) for an arbitrary instrument point.
  double moment(std::span<const double> beta, std::span<const double> w) const;

  // (1/n) sum_j A(b, w_j)^2 over the sample's instrument points.
  double objective(std::span<const double> beta) const;

 private:
  void build(const Dataset& data);

  double u_;
  std::size_t n_ = 0, k_ = 0, l_ = 0;
  std::vector<double> weights_;     // per row, 0 for censored rows
  std::vector<double> w_flat_;      // n x l, row-major
  std::vector<double> count_leq_;   // per j: #{i : w_i <= w_j}
  // Uncensored rows only, in ascending row order:
  std::vector<std::uint32_t> unc_row_;  // original row index
  std::vector<double> unc_log_y_;
  std::vector<double> unc_weight_;
  std::vector<double> unc_z_flat_;  // (#uncensored) x k, row-major
  std::vector<std::uint32_t> cols_;         // concatenated {j : w_i <= w_j}
  std::vector<std::size_t> col_offsets_;    // per uncensored row, size+1
  bool clipping_fired_ = false;
};

}  // namespace civqr
