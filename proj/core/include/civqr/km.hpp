#pragma once

#include <vector>

#include "civqr/model.hpp"

namespace civqr {

// Product-limit curve for the censoring distribution: the survival function
// G(t) = P(C > t) estimated from (y, delta) with the roles of event and
// censoring swapped, i.e. jumps occur at censoring times (delta == false).
// Evaluation is right-continuous with the jump at t included, matching the
// weighting convention G(y_i) used for uncensored rows.
struct KmCurve {
  std::vector<double> jump_times;      // strictly increasing censoring times
  std::vector<double> survival_after;  // curve value at and after each jump
  double floor_epsilon = 1e-10;

  // Value of the curve at t; results below floor_epsilon are clipped up to
  // floor_epsilon and reported through the clipped flag.
  double eval(double t, bool& clipped) const;
  double eval(double t) const {
    bool clipped = false;
    return eval(t, clipped);
  }
};

// Fits the censoring-distribution product-limit curve.  Requires a dataset
// with a clean validate() report.
KmCurve km_fit(const Dataset& data, double floor_epsilon = 1e-10);

}  // namespace civqr
