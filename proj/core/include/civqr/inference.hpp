#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "civqr/model.hpp"
#include "civqr/moment.hpp"
#include "civqr/optim.hpp"

namespace civqr {

struct FitConfig {
  QuantileLevel u;
  OptimConfig optim;
  double floor_epsilon = 1e-10;
};

struct FitResult {
  std::vector<double> beta_hat;
  double objective_value = 0.0;
  bool clipping_fired = false;  // some censoring weight hit the floor
  OptimResult optim;
};

struct BootstrapResult {
  std::size_t b = 0;  // replicates
  std::size_t k = 0;  // coefficients
  std::vector<double> replicates;  // b x k, row-major
  std::vector<double> ci_lower, ci_upper;
  double level = 0.0;
  std::size_t n_redraws = 0;  // resamples rejected for lacking events

  double rep(std::size_t r, std::size_t c) const { return replicates[r * k + c]; }
};

// Estimates the censoring curve, builds the moment objective, and minimises
// it by multi-start simplex descent.  Requires a dataset with a clean
// validate() report (in particular at least one uncensored row).
FitResult fit(const Dataset& data, const FitConfig& cfg, unsigned n_threads = 1);

// Nonparametric bootstrap: b resamples of n rows drawn with replacement, the
// censoring curve re-estimated and the model refit on each.  Resamples with
// no uncensored row are redrawn; more than 100 consecutive redraws for one
// replicate is an error.  Replicate r draws its rows and its optimiser starts
// from substreams (seed, r, 0) and (seed, r, 1), so results do not depend on
// the thread count.  Interval bounds are percentile quantiles of the
// replicate coefficients at levels (1 -+ level)/2.
BootstrapResult bootstrap(const Dataset& data, const FitConfig& cfg,
                          std::size_t b, double level, std::uint64_t seed,
                          unsigned n_threads = 1);

// Percentile intervals from a b x k row-major replicate matrix; b must be at
// least 2 and level must lie in (0,1).
std::pair<std::vector<double>, std::vector<double>> percentile_ci(
    const std::vector<double>& replicates, std::size_t b, std::size_t k,
    double level);

// One resample of data.n() rows drawn with replacement from data.  Resamples
// without a single uncensored row are rejected, counted in n_redraws, and
// redrawn; exceeding max_redraws consecutive rejections is an error.
Dataset draw_bootstrap_resample(std::mt19937_64& engine, const Dataset& data,
                                std::size_t& n_redraws,
                                std::size_t max_redraws = 100);

}  // namespace civqr
