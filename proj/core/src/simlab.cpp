#include "civqr/simlab.hpp"

#include <cmath>
#include <stdexcept>

#include "civqr/parallel.hpp"
#include "civqr/rng.hpp"
#include "civqr/stats.hpp"

namespace civqr {

namespace {

struct DrawnRow {
  Observation obs;
  double u, t, c;
};

// One row of the design; the per-row draw order (u, w2, [e], z3, c) is part
// of the reproducibility contract.
DrawnRow draw_row(int design_id, double lambda, std::mt19937_64& engine) {
  const double u = uniform01(engine);
  double w2 = 0.0, z2 = 0.0, z3 = 0.0;
  switch (design_id) {
    case 1:
      w2 = exponential(engine, 1.0);
      z2 = (w2 + 0.5 * u - 1.0 > 0.0) ? 1.0 : 0.0;
      z3 = uniform01(engine);
      break;
    case 2:
      w2 = lognormal01(engine);
      z2 = w2 + 0.5 * u + 0.2 * uniform01(engine);
      z3 = exponential(engine, 1.0);
      break;
    case 3:
      w2 = bernoulli(engine, 0.5) ? 1.0 : 0.0;
      z2 = (w2 + 0.5 * u - 1.0 > 0.0) ? 1.0 : 0.0;
      z3 = uniform01(engine);
      break;
    default:
      throw std::invalid_argument("design_id must be 1, 2 or 3");
  }
  const double t = std::exp(u * (1.0 + z2 + z3));
  const double c = exponential(engine, lambda);

  DrawnRow row;
  row.u = u;
  row.t = t;
  row.c = c;
  row.obs.y = std::min(t, c);
  row.obs.delta = t <= c;
  row.obs.z = {1.0, z2, z3};
  row.obs.w = {1.0, w2, z3};
  return row;
}

void check_design(const SimDesign& d) {
  if (d.design_id < 1 || d.design_id > 3)
    throw std::invalid_argument("design_id must be 1, 2 or 3");
  if (!(d.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (d.n == 0) throw std::invalid_argument("sample size must be positive");
  (void)QuantileLevel(d.u);  // throws unless 0 < u < 1
}

}  // namespace

GeneratedSample gen_design_with_latents(const SimDesign& d) {
  check_design(d);
  auto engine = seeded_engine(d.seed);
  GeneratedSample sample{Dataset({}, 3, 3), {}, {}, {}};
  std::vector<Observation> rows;
  rows.reserve(d.n);
  sample.latent_u.reserve(d.n);
  sample.latent_t.reserve(d.n);
  sample.latent_c.reserve(d.n);
  for (std::size_t i = 0; i < d.n; ++i) {
    DrawnRow row = draw_row(d.design_id, d.lambda, engine);
    rows.push_back(std::move(row.obs));
    sample.latent_u.push_back(row.u);
    sample.latent_t.push_back(row.t);
    sample.latent_c.push_back(row.c);
  }
  sample.data = Dataset(std::move(rows), 3, 3);
  return sample;
}

Dataset gen_design(const SimDesign& d) {
  return gen_design_with_latents(d).data;
}

SimMetrics run_monte_carlo(const SimDesign& d, std::size_t n_reps,
                           const FitConfig& fit_cfg, unsigned n_threads) {
  return run_monte_carlo(
      d, n_reps, fit_cfg,
      [](const Dataset& data, const FitConfig& cfg) { return fit(data, cfg, 1); },
      n_threads);
}

SimMetrics run_monte_carlo(const SimDesign& d, std::size_t n_reps,
                           const FitConfig& fit_cfg, const EstimatorFn& estimator,
                           unsigned n_threads) {
  check_design(d);
  fit_cfg.optim.check();
  if (n_reps == 0) throw std::invalid_argument("n_reps must be positive");
  if (fit_cfg.optim.dim() != 3)
    throw std::invalid_argument("the benchmark designs have 3 coefficients");
  for (std::size_t c = 0; c < 3; ++c)
    if (d.u < fit_cfg.optim.box_lower[c] || d.u > fit_cfg.optim.box_upper[c])
      throw std::invalid_argument("the search box must contain the true coefficients");

  struct RepOutcome {
    bool ok = false;
    std::array<double, 3> beta{};
    std::array<double, 3> beta_boot{};
    std::size_t n_censored = 0;
    std::size_t n_redraws = 0;
  };
  std::vector<RepOutcome> reps(n_reps);

  parallel_for(n_reps, n_threads, [&](std::size_t r) {
    RepOutcome& out = reps[r];
    SimDesign rep_design = d;
    rep_design.seed = derive_seed(d.seed, r, 0);
    const Dataset sample = gen_design(rep_design);
    for (std::size_t i = 0; i < sample.n(); ++i)
      if (!sample[i].delta) ++out.n_censored;

    try {
      FitConfig cfg_fit = fit_cfg;
      cfg_fit.optim.seed = derive_seed(d.seed, r, 1);
      const FitResult fit_main = estimator(sample, cfg_fit);

      auto engine = seeded_engine(d.seed, r, 2);
      const Dataset resample = draw_bootstrap_resample(engine, sample, out.n_redraws);
      FitConfig cfg_boot = fit_cfg;
      cfg_boot.optim.seed = derive_seed(d.seed, r, 3);
      const FitResult fit_boot = estimator(resample, cfg_boot);

      for (std::size_t c = 0; c < 3; ++c) {
        out.beta[c] = fit_main.beta_hat[c];
        out.beta_boot[c] = fit_boot.beta_hat[c];
      }
      out.ok = true;
    } catch (const std::exception&) {
      out.ok = false;
    }
  });

  SimMetrics metrics;
  std::size_t n_censored_total = 0;
  for (const auto& rep : reps) {
    n_censored_total += rep.n_censored;
    metrics.n_redraws += rep.n_redraws;
    if (rep.ok)
      ++metrics.n_reps;
    else
      ++metrics.failed_reps;
  }
  metrics.censored_fraction =
      static_cast<double>(n_censored_total) / static_cast<double>(n_reps * d.n);
  if (metrics.failed_reps * 100 >= n_reps)
    throw std::runtime_error("more than 1% of Monte Carlo replications failed");
  if (metrics.n_reps == 0)
    throw std::runtime_error("all Monte Carlo replications failed");

  // Bias and root mean squared error of the coefficient vector.
  const double truth = d.u;
  double sq_err = 0.0;
  for (const auto& rep : reps) {
    if (!rep.ok) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double err = rep.beta[c] - truth;
      metrics.bias[c] += err;
      sq_err += err * err;
    }
  }
  const auto n_ok = static_cast<double>(metrics.n_reps);
  for (std::size_t c = 0; c < 3; ++c) metrics.bias[c] /= n_ok;
  metrics.rmse = std::sqrt(sq_err / n_ok);

  // Coverage with one bootstrap refit per replication: pool the centred
  // differences, take their percentile quantiles as a common interval, then
  // recentre that interval at each replication's estimate.
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> centred;
    centred.reserve(metrics.n_reps);
    for (const auto& rep : reps)
      if (rep.ok) centred.push_back(rep.beta_boot[c] - rep.beta[c]);
    const double q_lo = quantile_type7(centred, 0.025);
    const double q_hi = quantile_type7(centred, 0.975);
    std::size_t covered = 0;
    for (const auto& rep : reps) {
      if (!rep.ok) continue;
      if (rep.beta[c] - q_hi <= truth && truth <= rep.beta[c] - q_lo) ++covered;
    }
    metrics.coverage[c] = static_cast<double>(covered) / n_ok;
  }
  return metrics;
}

double censoring_rate(int design_id, double lambda, std::size_t n_draws,
                      std::uint64_t seed) {
  if (design_id < 1 || design_id > 3)
    throw std::invalid_argument("design_id must be 1, 2 or 3");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (n_draws == 0) throw std::invalid_argument("n_draws must be positive");
  auto engine = seeded_engine(seed);
  std::size_t censored = 0;
  for (std::size_t i = 0; i < n_draws; ++i)
    if (!draw_row(design_id, lambda, engine).obs.delta) ++censored;
  return static_cast<double>(censored) / static_cast<double>(n_draws);
}

Dataset gen_noncompliance_sample(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample size must be positive");
  auto engine = seeded_engine(seed);
  std::vector<Observation> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rank = uniform01(engine);
    const double age = std::floor(uniform_in(engine, 18.0, 55.0));
    const bool offer = bernoulli(engine, 0.65);
    // Take-up depends on the offer and, through the rank, on the outcome.
    const double takeup_p = (offer ? 0.62 : 0.08) + 0.1 * rank;
    const double treatment = bernoulli(engine, takeup_p) ? 1.0 : 0.0;
    const double log_t = (5.2 + 2.2 * rank) - (0.3 + 0.4 * rank) * treatment -
                         0.01 * (age - 35.0);
    const double t = std::exp(log_t);
    // Administrative follow-up window between two and three years.
    const double c = uniform_in(engine, 730.0, 1095.0);
    Observation obs;
    obs.y = std::min(t, c);
    obs.delta = t <= c;
    obs.z = {1.0, treatment, age};
    obs.w = {1.0, offer ? 1.0 : 0.0, age};
    rows.push_back(std::move(obs));
  }
  return Dataset(std::move(rows), 3, 3);
}

}  // namespace civqr
