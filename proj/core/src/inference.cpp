#include "civqr/inference.hpp"

#include <stdexcept>

#include "civqr/km.hpp"
#include "civqr/parallel.hpp"
#include "civqr/rng.hpp"
#include "civqr/stats.hpp"

namespace civqr {

FitResult fit(const Dataset& data, const FitConfig& cfg, unsigned n_threads) {
  require_valid(data);
  cfg.optim.check();
  if (cfg.optim.dim() != data.k())
    throw std::invalid_argument("box dimension does not match the regressors");

  const KmCurve curve = km_fit(data, cfg.floor_epsilon);
  const MomentContext ctx(data, curve, QuantileLevel(cfg.u));
  auto objective = [&ctx](std::span<const double> b) { return ctx.objective(b); };

  FitResult result;
  result.optim = multi_start(objective, cfg.optim, n_threads);
  result.beta_hat = result.optim.best_x;
  result.objective_value = result.optim.best_f;
  result.clipping_fired = ctx.clipping_fired();
  return result;
}

Dataset draw_bootstrap_resample(std::mt19937_64& engine, const Dataset& data,
                                std::size_t& n_redraws, std::size_t max_redraws) {
  const std::size_t n = data.n();
  std::vector<Observation> rows;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt > max_redraws)
      throw std::runtime_error(
          "bootstrap resampling failed: more than 100 consecutive resamples "
          "contained no uncensored observation");
    rows.clear();
    rows.reserve(n);
    bool any_event = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Observation& row = data[uniform_index(engine, n)];
      any_event = any_event || row.delta;
      rows.push_back(row);
    }
    if (any_event) break;
    ++n_redraws;
  }
  return Dataset(std::move(rows), data.k(), data.l());
}

BootstrapResult bootstrap(const Dataset& data, const FitConfig& cfg,
                          std::size_t b, double level, std::uint64_t seed,
                          unsigned n_threads) {
  require_valid(data);
  cfg.optim.check();
  if (b < 2) throw std::invalid_argument("bootstrap needs at least 2 replicates");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level must lie strictly between 0 and 1");

  const std::size_t k = data.k();
  BootstrapResult result;
  result.b = b;
  result.k = k;
  result.level = level;
  result.replicates.resize(b * k);

  std::vector<std::size_t> redraws(b, 0);
  parallel_for(b, n_threads, [&](std::size_t r) {
    auto engine = seeded_engine(seed, r, 0);
    const Dataset resample = draw_bootstrap_resample(engine, data, redraws[r]);
    FitConfig rep_cfg = cfg;
    rep_cfg.optim.seed = derive_seed(seed, r, 1);
    const FitResult rep_fit = fit(resample, rep_cfg, 1);
    for (std::size_t c = 0; c < k; ++c)
      result.replicates[r * k + c] = rep_fit.beta_hat[c];
  });

  for (std::size_t r = 0; r < b; ++r) result.n_redraws += redraws[r];
  std::tie(result.ci_lower, result.ci_upper) =
      percentile_ci(result.replicates, b, k, level);
  return result;
}

std::pair<std::vector<double>, std::vector<double>> percentile_ci(
    const std::vector<double>& replicates, std::size_t b, std::size_t k,
    double level) {
  if (b < 2) throw std::invalid_argument("percentile intervals need at least 2 replicates");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level must lie strictly between 0 and 1");
  if (replicates.size() != b * k)
    throw std::invalid_argument("replicate matrix has wrong size");

  const double p_lo = (1.0 - level) / 2.0;
  const double p_hi = 1.0 - p_lo;
  std::vector<double> lower(k), upper(k), column(b);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = 0; r < b; ++r) column[r] = replicates[r * k + c];
    lower[c] = quantile_type7(column, p_lo);
    upper[c] = quantile_type7(column, p_hi);
  }
  return {std::move(lower), std::move(upper)};
}

}  // namespace civqr
