#include <atomic>
#include <cmath>
#include <memory>

#include "civqr/simlab.hpp"
#include "doctest.h"
#include "test_support.hpp"

using civqr::Dataset;
using civqr::FitConfig;
using civqr::FitResult;
using civqr::gen_design;
using civqr::gen_design_with_latents;
using civqr::QuantileLevel;
using civqr::run_monte_carlo;
using civqr::SimDesign;
using civqr::SimMetrics;

namespace {

SimDesign design(int id, double lambda, std::size_t n, std::uint64_t seed,
                 double u = 0.5) {
  SimDesign d;
  d.design_id = id;
  d.lambda = lambda;
  d.n = n;
  d.u = u;
  d.seed = seed;
  return d;
}

FitConfig unit_box_config(double u) {
  FitConfig cfg{QuantileLevel(u), {}};
  cfg.optim.box_lower = {0.0, 0.0, 0.0};
  cfg.optim.box_upper = {1.0, 1.0, 1.0};
  return cfg;
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  if (a.n() != b.n() || a.k() != b.k() || a.l() != b.l()) return false;
  for (std::size_t i = 0; i < a.n(); ++i) {
    if (a[i].y != b[i].y || a[i].delta != b[i].delta) return false;
    if (a[i].z != b[i].z || a[i].w != b[i].w) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generated samples obey the structural equations") {
  for (int id : {1, 2, 3}) {
    const auto sample = gen_design_with_latents(design(id, 0.1, 400, 99));
    const Dataset& data = sample.data;
    REQUIRE(data.n() == 400);
    REQUIRE(data.k() == 3);
    REQUIRE(data.l() == 3);
    for (std::size_t i = 0; i < data.n(); ++i) {
      const double u = sample.latent_u[i];
      const double t = sample.latent_t[i];
      const double c = sample.latent_c[i];
      CHECK(u > 0.0);
      CHECK(u < 1.0);
      CHECK(data[i].z[0] == 1.0);
      CHECK(data[i].w[0] == 1.0);
      CHECK(data[i].w[2] == data[i].z[2]);  // shared exogenous coordinate
      // T = exp(U (1 + z2 + z3)) and the censoring mechanism.
      CHECK(t == std::exp(u * (1.0 + data[i].z[1] + data[i].z[2])));
      CHECK(data[i].y == std::min(t, c));
      CHECK(data[i].delta == (t <= c));

      const double w2 = data[i].w[1];
      const double z2 = data[i].z[1];
      if (id == 1) {
        CHECK(w2 > 0.0);
        CHECK(z2 == ((w2 + 0.5 * u - 1.0 > 0.0) ? 1.0 : 0.0));
        CHECK(data[i].z[2] < 1.0);
      } else if (id == 2) {
        CHECK(w2 > 0.0);
        CHECK(z2 > w2);       // positive endogenous and noise shifts
        CHECK(z2 < w2 + 0.7);
        CHECK(data[i].z[2] > 0.0);
      } else {
        const bool offered = w2 == 1.0;
        CHECK((w2 == 0.0 || w2 == 1.0));
        CHECK(z2 == (offered ? 1.0 : 0.0));  // take-up equals the draw
      }
    }
  }
}

TEST_CASE("generation is reproducible and seed-sensitive") {
  const SimDesign d = design(1, 0.2, 200, 31);
  CHECK(same_dataset(gen_design(d), gen_design(d)));
  SimDesign other = d;
  other.seed = 32;
  CHECK_FALSE(same_dataset(gen_design(d), gen_design(other)));
}

TEST_CASE("generator marginals look right") {
  const auto sample = gen_design_with_latents(design(1, 0.1, 20000, 7));
  double mean_u = 0.0, mean_w2 = 0.0;
  for (std::size_t i = 0; i < 20000; ++i) {
    mean_u += sample.latent_u[i];
    mean_w2 += sample.data[i].w[1];
  }
  mean_u /= 20000.0;
  mean_w2 /= 20000.0;
  CHECK(mean_u == doctest::Approx(0.5).epsilon(0.02));
  CHECK(mean_w2 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("design parameters are validated") {
  CHECK_THROWS_AS(gen_design(design(4, 0.1, 10, 1)), std::invalid_argument);
  CHECK_THROWS_AS(gen_design(design(1, 0.0, 10, 1)), std::invalid_argument);
  CHECK_THROWS_AS(gen_design(design(1, 0.1, 0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(gen_design(design(1, 0.1, 10, 1, 0.0)), std::invalid_argument);
}

TEST_CASE("monte carlo metrics with a pinned estimator") {
  const SimDesign d = design(3, 0.07, 30, 17);
  const FitConfig cfg = unit_box_config(0.5);

  // An estimator that always returns the truth: zero bias and error, full
  // coverage.
  civqr::EstimatorFn truth_fn = [](const Dataset&, const FitConfig& c) {
    FitResult r;
    r.beta_hat = {c.u.value(), c.u.value(), c.u.value()};
    return r;
  };
  const SimMetrics exact = run_monte_carlo(d, 40, cfg, truth_fn);
  CHECK(exact.n_reps == 40);
  CHECK(exact.failed_reps == 0);
  for (int c = 0; c < 3; ++c) {
    CHECK(exact.bias[c] == 0.0);
    CHECK(exact.coverage[c] == 1.0);
  }
  CHECK(exact.rmse == 0.0);
  CHECK(exact.censored_fraction > 0.05);
  CHECK(exact.censored_fraction < 0.45);

  // A constant off-by-0.1 estimator: bias 0.1 per coordinate, rmse
  // sqrt(3)*0.1, and the degenerate intervals never cover.
  civqr::EstimatorFn off_fn = [](const Dataset&, const FitConfig& c) {
    FitResult r;
    const double v = c.u.value() + 0.1;
    r.beta_hat = {v, v, v};
    return r;
  };
  const SimMetrics off = run_monte_carlo(d, 40, cfg, off_fn);
  for (int c = 0; c < 3; ++c) {
    CHECK(off.bias[c] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(off.coverage[c] == 0.0);
  }
  CHECK(off.rmse == doctest::Approx(0.1 * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("monte carlo tolerates rare failures and rejects frequent ones") {
  const SimDesign d = design(3, 0.07, 25, 23);
  const FitConfig cfg = unit_box_config(0.5);

  auto failing_fn = [](int every) {
    auto counter = std::make_shared<std::atomic<int>>(0);
    return civqr::EstimatorFn([counter, every](const Dataset&, const FitConfig& c) {
      if (counter->fetch_add(1) % every == 0)
        throw std::runtime_error("synthetic failure");
      FitResult r;
      r.beta_hat = {c.u.value(), c.u.value(), c.u.value()};
      return r;
    });
  };

  // 1 failure in 500 fits (250 replications): under the 1% cut.
  const SimMetrics ok = run_monte_carlo(d, 250, cfg, failing_fn(500));
  CHECK(ok.failed_reps == 1);
  CHECK(ok.n_reps == 249);

  // Every 40th fit fails: at least 1% of replications break.
  CHECK_THROWS_WITH_AS(run_monte_carlo(d, 200, cfg, failing_fn(40)),
                       doctest::Contains("replications failed"),
                       std::runtime_error);
}

TEST_CASE("monte carlo runs are thread-count invariant") {
  const SimDesign d = design(1, 0.15, 30, 41);
  const FitConfig cfg = unit_box_config(0.5);
  // Data-dependent but cheap estimator: the mean duration folded into (0,1).
  civqr::EstimatorFn fn = [](const Dataset& data, const FitConfig&) {
    double m = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) m += data[i].y;
    m /= static_cast<double>(data.n());
    const double v = m / (1.0 + m);
    FitResult r;
    r.beta_hat = {v, v, v};
    return r;
  };
  const SimMetrics a = run_monte_carlo(d, 60, cfg, fn, 1);
  const SimMetrics b = run_monte_carlo(d, 60, cfg, fn, 4);
  CHECK(a.bias == b.bias);
  CHECK(a.rmse == b.rmse);
  CHECK(a.coverage == b.coverage);
  CHECK(a.censored_fraction == b.censored_fraction);
  CHECK(a.n_redraws == b.n_redraws);
}

TEST_CASE("monte carlo insists the box covers the truth") {
  const SimDesign d = design(3, 0.07, 20, 5, 0.9);
  FitConfig cfg = unit_box_config(0.9);
  cfg.optim.box_upper = {0.8, 0.8, 0.8};  // excludes 0.9
  CHECK_THROWS_AS(run_monte_carlo(d, 10, cfg), std::invalid_argument);
}

TEST_CASE("population censoring rates are reproducible") {
  const double a = civqr::censoring_rate(3, 0.07, 200000, 8);
  const double b = civqr::censoring_rate(3, 0.07, 200000, 8);
  CHECK(a == b);
  CHECK(a == doctest::Approx(0.20).epsilon(0.05));

  const double heavier = civqr::censoring_rate(3, 0.175, 200000, 8);
  CHECK(heavier > a);
  CHECK_THROWS_AS(civqr::censoring_rate(0, 0.1), std::invalid_argument);
}

TEST_CASE("synthetic program-evaluation sample has the advertised shape") {
  const Dataset data = civqr::gen_noncompliance_sample(4000, 77);
  REQUIRE(data.n() == 4000);
  REQUIRE(data.k() == 3);
  REQUIRE(data.l() == 3);
  CHECK(civqr::validate(data).empty());

  std::size_t treated = 0, offered = 0, treated_unoffered = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    CHECK(data[i].z[0] == 1.0);
    CHECK(data[i].w[0] == 1.0);
    CHECK((data[i].z[1] == 0.0 || data[i].z[1] == 1.0));
    CHECK((data[i].w[1] == 0.0 || data[i].w[1] == 1.0));
    CHECK(data[i].z[2] == data[i].w[2]);  // age on both sides
    CHECK(data[i].z[2] >= 18.0);
    CHECK(data[i].z[2] <= 55.0);
    if (data[i].z[1] == 1.0) ++treated;
    if (data[i].w[1] == 1.0) ++offered;
    if (data[i].z[1] == 1.0 && data[i].w[1] == 0.0) ++treated_unoffered;
  }
  // Imperfect compliance in both directions.
  CHECK(treated > 0);
  CHECK(treated < offered);
  CHECK(treated_unoffered > 0);
  const double cens = data.censored_fraction();
  CHECK(cens > 0.1);
  CHECK(cens < 0.5);
  CHECK(same_dataset(data, civqr::gen_noncompliance_sample(4000, 77)));
}
