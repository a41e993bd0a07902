#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "civqr/model.hpp"

namespace civqr {

// Checks that the fitted conditional quantiles stay below the largest
// observed censoring time c_bar = max{y_i : row i censored}: beyond it the
// censoring curve has no support and the quantile is not recoverable from
// the data.  The comparison is done in log space.  With no censored row
// there is no restriction and c_bar is +infinity.
struct SupportReport {
  double c_bar = 0.0;
  std::vector<std::size_t> violating_rows;
  bool pass = true;
};
SupportReport support_check(const Dataset& data, std::span<const double> beta);

// Difference of take-up frequencies P(z_treat = 1 | w_instr = 1) -
// P(z_treat = 1 | w_instr = 0) for a binary treatment column of z and a
// binary instrument column of w.  Values near zero mean the instrument does
// not move the treatment.
double relevance_check(const Dataset& data, std::size_t treat_col,
                       std::size_t instr_col);

// Settings for rank_condition_check.  The grid is grid_steps x grid_steps
// log-duration pairs (t0, t1) covering center +- grid_radius per axis; when
// no center is given it defaults to the per-arm censoring-weighted u-quantile
// of the log durations.  Cells with conditional probability at or below
// prob_floor are excluded.  nu and f_lower delimit the region of pairs the
// summary counts as relevant: arm-wise quantile mismatch at most nu and cell
// densities above f_lower.
struct RankOptions {
  std::size_t treat_col = 1;
  std::size_t instr_col = 1;
  double grid_radius = 0.25;
  int grid_steps = 11;
  double nu = 0.05;
  double f_lower = 0.0;
  double prob_floor = 0.01;
  std::optional<std::pair<double, double>> center;      // (t at z=0, t at z=1)
  std::optional<std::pair<double, double>> bandwidths;  // per treatment arm
};

// Local rank diagnostic for one binary treatment / binary instrument pair.
// At each grid point (t0, t1) the 2x2 matrix with entries
//
//   m[w][z] = P(z_treat = z | w_instr = w) * f(t_z | z, w),
//
// is formed, where f(. | z, w) is a censoring-weighted Gaussian kernel
// estimate of the log-duration density in cell (z, w) with a per-arm
// Silverman bandwidth.  A determinant bounded away from zero with a sign
// that never flips across the grid is the empirical signature of the
// monotone likelihood ratio ordering that makes the coefficients locally
// identifiable; sign flips or tiny determinants flag weak identification.
struct RankReport {
  std::vector<std::pair<double, double>> grid;  // (t0, t1), t1 varying fastest
  std::vector<double> determinants;             // one per grid point
  double min_abs_det = 0.0;
  bool direction_consistent = false;  // determinant sign never flips
  std::pair<double, double> center{};
  std::pair<double, double> bandwidths{};
  std::array<std::array<double, 2>, 2> cond_prob{};   // [w][z]
  std::array<std::array<bool, 2>, 2> cell_skipped{};  // [w][z]
  int n_in_region = 0;  // grid points passing the nu / f_lower screens
  std::vector<std::string> warnings;
};
RankReport rank_condition_check(const Dataset& data, QuantileLevel u,
                                const RankOptions& opts);

// Log-duration pair implied by fitted coefficients: t_z = z'beta with the
// treatment column set to z and every other column at its sample mean.
std::pair<double, double> rank_center_from_fit(const Dataset& data,
                                               std::span<const double> beta,
                                               std::size_t treat_col);

}  // namespace civqr
