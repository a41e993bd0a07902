#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace civqr {

using ObjectiveFn = std::function<double(std::span<const double>)>;

// Box-constrained derivative-free minimisation settings.  The box is a hard
// constraint: points outside it are treated as +infinity and never accepted,
// so every reported point lies inside.
struct OptimConfig {
  std::vector<double> box_lower;
  std::vector<double> box_upper;
  int n_starts = 100;
  int max_iters = 500;
  double f_tol = 1e-8;   // stop when the simplex f-spread falls below this
  double x_tol = 1e-6;   // stop when the simplex diameter falls below this
  std::uint64_t seed = 0;
  bool record_trace = false;

  std::size_t dim() const { return box_lower.size(); }
  void check() const;  // throws std::invalid_argument on a malformed config
};

// Outcome of a single simplex descent.
struct NmRun {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;          // stopped by f_tol or x_tol, not max_iters
  std::vector<double> trace;       // best f after each iteration, if recorded
};

struct OptimResult {
  std::vector<double> best_x;
  double best_f = 0.0;
  std::vector<NmRun> starts;       // one record per start, in start order
};

// Nelder-Mead with reflection 1, expansion 2, contraction 0.5, shrink 0.5.
// The initial simplex offsets x0 by 5% of the box width along each axis,
// reflecting the offset inward where it would leave the box.  Throws if x0
// lies outside the box.
NmRun nelder_mead(const ObjectiveFn& f, std::vector<double> x0,
                  const OptimConfig& cfg);

// Runs nelder_mead from cfg.n_starts points drawn uniformly on the box, each
// from its own substream of cfg.seed, and keeps the best final value (ties
// broken by start index).  The best distinct endpoints are then sharpened by
// a deterministic local refinement (recentring lattice scans plus a
// shrinking pattern search), which crosses the flat regions of
// piecewise-constant objectives that stall a collapsed simplex; best_x and
// best_f report the refined optimum, while starts keeps the raw runs.  The
// result is identical for any thread count.
OptimResult multi_start(const ObjectiveFn& f, const OptimConfig& cfg,
                        unsigned n_threads = 1);

}  // namespace civqr
