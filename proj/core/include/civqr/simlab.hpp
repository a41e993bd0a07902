#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "civqr/inference.hpp"
#include "civqr/model.hpp"

namespace civqr {

// One of three benchmark data-generating processes.  All three share the
// structural part: a scalar latent rank U ~ Uniform(0,1), regressors
// z = (1, z2, z3), instruments w = (1, w2, z3), true coefficient vector
// (u, u, u) at every level so the duration is T = exp(U (1 + z2 + z3)), and
// an independent exponential censoring time C with the given rate.  The
// observed pair is y = min(T, C), delta = 1{T <= C}.  The same rank U enters
// z2, which is what makes z2 endogenous, while w2 and z3 are independent
// of U.
//
//   design 1: w2 ~ Exp(1),         z2 = 1{w2 + 0.5 U - 1 > 0}, z3 ~ Uniform(0,1)
//   design 2: w2 ~ LogNormal(0,1), z2 = w2 + 0.5 U + 0.2 E with E ~ Uniform(0,1),
//                                  z3 ~ Exp(1)
//   design 3: w2 ~ Bernoulli(0.5), z2 = 1{w2 + 0.5 U - 1 > 0}, z3 ~ Uniform(0,1)
struct SimDesign {
  int design_id = 1;     // 1, 2 or 3
  double lambda = 0.1;   // censoring rate parameter (exponential)
  std::size_t n = 500;
  double u = 0.5;        // quantile level targeted by the Monte Carlo metrics
  std::uint64_t seed = 0;
};

// A generated sample together with the latent draws behind it, for tests
// that check the generator against the structural equations.
struct GeneratedSample {
  Dataset data;
  std::vector<double> latent_u;  // rank variable per row
  std::vector<double> latent_t;  // uncensored duration per row
  std::vector<double> latent_c;  // censoring time per row
};

Dataset gen_design(const SimDesign& d);
GeneratedSample gen_design_with_latents(const SimDesign& d);

// Monte Carlo summary over replications of one design.  Coverage is measured
// with one bootstrap refit per replication: the centred differences of all
// replications are pooled, their percentile quantiles form one common
// interval width, and coverage is the fraction of replications whose
// recentred interval contains the truth.
struct SimMetrics {
  std::array<double, 3> bias{};
  double rmse = 0.0;               // sqrt of mean squared coefficient-vector error
  std::array<double, 3> coverage{};
  std::size_t n_reps = 0;          // replications that produced a fit
  std::size_t failed_reps = 0;
  double censored_fraction = 0.0;  // observed, pooled over replications
  std::size_t n_redraws = 0;
};

using EstimatorFn = std::function<FitResult(const Dataset&, const FitConfig&)>;

// Runs n_reps independent replications of the design, fitting each sample and
// one bootstrap resample of it.  Replication r derives all of its randomness
// from substreams (d.seed, r, .), so results are identical for any thread
// count.  Failed replications are dropped from the metrics; if they reach 1%
// of the total the run aborts.  The estimator hook substitutes for fit() in
// tests.
SimMetrics run_monte_carlo(const SimDesign& d, std::size_t n_reps,
                           const FitConfig& fit_cfg, unsigned n_threads = 1);
SimMetrics run_monte_carlo(const SimDesign& d, std::size_t n_reps,
                           const FitConfig& fit_cfg, const EstimatorFn& estimator,
                           unsigned n_threads = 1);

// Fraction of censored rows in the design's population, estimated from
// n_draws independent rows.
double censoring_rate(int design_id, double lambda, std::size_t n_draws = 1000000,
                      std::uint64_t seed = 12345);

// Synthetic program-evaluation-shaped sample: duration in days, an offered
// treatment taken up selectively, the offer itself as instrument, and an age
// covariate shared by both sides.  Censoring comes from an administrative
// follow-up window.  Columns: z = (1, treatment, age), w = (1, offer, age).
Dataset gen_noncompliance_sample(std::size_t n, std::uint64_t seed);

}  // namespace civqr
