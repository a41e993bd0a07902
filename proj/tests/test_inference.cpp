#include <cmath>
#include <numeric>

#include "civqr/inference.hpp"
#include "civqr/km.hpp"
#include "civqr/simlab.hpp"
#include "doctest.h"
#include "test_support.hpp"

using civqr::bootstrap;
using civqr::BootstrapResult;
using civqr::Dataset;
using civqr::fit;
using civqr::FitConfig;
using civqr::FitResult;
using civqr::percentile_ci;
using civqr::QuantileLevel;

namespace {

FitConfig small_config(double u, int starts = 20, std::uint64_t seed = 5) {
  FitConfig cfg{QuantileLevel(u), {}};
  cfg.optim.box_lower = {0.0, 0.0, 0.0};
  cfg.optim.box_upper = {1.0, 1.0, 1.0};
  cfg.optim.n_starts = starts;
  cfg.optim.seed = seed;
  return cfg;
}

Dataset small_design_sample(std::uint64_t seed, std::size_t n = 80) {
  civqr::SimDesign d;
  d.design_id = 3;
  d.lambda = 0.07;
  d.n = n;
  d.u = 0.5;
  d.seed = seed;
  return civqr::gen_design(d);
}

}  // namespace

TEST_CASE("fit returns the best objective value over its starts") {
  const Dataset data = small_design_sample(11);
  const FitConfig cfg = small_config(0.5);
  const FitResult result = fit(data, cfg);

  REQUIRE(result.beta_hat.size() == 3);
  for (double v : result.beta_hat) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // The reported value is the objective at the reported point.
  const civqr::MomentContext ctx(data, civqr::km_fit(data), cfg.u);
  CHECK(result.objective_value == ctx.objective(result.beta_hat));
  for (const auto& run : result.optim.starts)
    CHECK(run.f >= result.objective_value);
  CHECK(result.optim.starts.size() == 20);
}

TEST_CASE("fit is deterministic and thread-count invariant") {
  const Dataset data = small_design_sample(12);
  const FitConfig cfg = small_config(0.5);
  const FitResult a = fit(data, cfg, 1);
  const FitResult b = fit(data, cfg, 3);
  CHECK(a.beta_hat == b.beta_hat);
  CHECK(a.objective_value == b.objective_value);
}

TEST_CASE("fit refuses datasets without events and mismatched boxes") {
  const Dataset no_events = testsup::survival_rows({{1, 0}, {2, 0}});
  FitConfig cfg{QuantileLevel(0.5), {}};
  cfg.optim.box_lower = {0.0};
  cfg.optim.box_upper = {1.0};
  CHECK_THROWS_WITH_AS(fit(no_events, cfg),
                       doctest::Contains("no uncensored observations"),
                       std::invalid_argument);

  const Dataset data = small_design_sample(13);
  CHECK_THROWS_AS(fit(data, cfg), std::invalid_argument);  // box is 1-dim
}

TEST_CASE("percentile interval endpoints on 1..100") {
  std::vector<double> replicates(100);
  std::iota(replicates.begin(), replicates.end(), 1.0);
  const auto [lo, hi] = percentile_ci(replicates, 100, 1, 0.90);
  CHECK(lo[0] == doctest::Approx(5.95).epsilon(1e-12));
  CHECK(hi[0] == doctest::Approx(95.05).epsilon(1e-12));

  const auto [lo95, hi95] = percentile_ci(replicates, 100, 1, 0.95);
  CHECK(lo95[0] == doctest::Approx(3.475).epsilon(1e-12));
  CHECK(hi95[0] == doctest::Approx(97.525).epsilon(1e-12));
}

TEST_CASE("percentile interval rejects degenerate inputs") {
  CHECK_THROWS_AS(percentile_ci({1.0}, 1, 1, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(percentile_ci({1.0, 2.0}, 2, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(percentile_ci({1.0, 2.0}, 2, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(percentile_ci({1.0, 2.0}, 2, 2, 0.9), std::invalid_argument);
}

TEST_CASE("bootstrap replicates are deterministic and ordered intervals") {
  const Dataset data = small_design_sample(21, 50);
  const FitConfig cfg = small_config(0.5, 8);
  const BootstrapResult a = bootstrap(data, cfg, 12, 0.95, 303, 1);
  const BootstrapResult b = bootstrap(data, cfg, 12, 0.95, 303, 4);
  CHECK(a.replicates == b.replicates);
  CHECK(a.ci_lower == b.ci_lower);
  CHECK(a.ci_upper == b.ci_upper);
  CHECK(a.n_redraws == b.n_redraws);

  const BootstrapResult c = bootstrap(data, cfg, 12, 0.95, 304, 1);
  CHECK(a.replicates != c.replicates);

  REQUIRE(a.b == 12);
  REQUIRE(a.k == 3);
  for (std::size_t col = 0; col < 3; ++col) {
    CHECK(a.ci_lower[col] <= a.ci_upper[col]);
    for (std::size_t r = 0; r < a.b; ++r) {
      CHECK(a.rep(r, col) >= 0.0);
      CHECK(a.rep(r, col) <= 1.0);
    }
  }

  // Intervals are the percentile quantiles of the replicate columns.
  const auto [lo, hi] = percentile_ci(a.replicates, a.b, a.k, a.level);
  CHECK(a.ci_lower == lo);
  CHECK(a.ci_upper == hi);
}

TEST_CASE("bootstrap validates its arguments") {
  const Dataset data = small_design_sample(22, 40);
  const FitConfig cfg = small_config(0.5, 4);
  CHECK_THROWS_AS(bootstrap(data, cfg, 1, 0.95, 1), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap(data, cfg, 8, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap(data, cfg, 8, 0.0, 1), std::invalid_argument);
}

TEST_CASE("resamples without events are redrawn or refused") {
  // One event among three rows: a resample misses it with probability
  // (2/3)^3, so redraws happen often across seeds.
  const Dataset data = testsup::survival_rows({{1.0, 1}, {2.0, 0}, {3.0, 0}});
  std::size_t throws = 0, redraws_seen = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto engine = civqr::seeded_engine(seed);
    std::size_t n_redraws = 0;
    try {
      const Dataset resample =
          civqr::draw_bootstrap_resample(engine, data, n_redraws, 0);
      bool any_event = false;
      for (std::size_t i = 0; i < resample.n(); ++i)
        if (resample[i].delta) any_event = true;
      CHECK(any_event);
    } catch (const std::runtime_error&) {
      ++throws;  // the cap of 0 forbids any redraw
    }
    n_redraws = 0;
    auto engine2 = civqr::seeded_engine(seed);
    const Dataset ok = civqr::draw_bootstrap_resample(engine2, data, n_redraws);
    bool any_event = false;
    for (std::size_t i = 0; i < ok.n(); ++i)
      if (ok[i].delta) any_event = true;
    CHECK(any_event);
    redraws_seen += n_redraws;
  }
  CHECK(throws > 0);
  CHECK(redraws_seen > 0);
}
