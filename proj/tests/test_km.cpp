#include <cmath>

#include "civqr/km.hpp"
#include "doctest.h"
#include "test_support.hpp"

using civqr::km_fit;
using civqr::KmCurve;

TEST_CASE("censoring curve on a worked three-row sample") {
  // Censoring events at t=1 (3 at risk) and t=3 (1 at risk):
  // G = 1 before 1, then 2/3, then 2/3 * 0 = 0.
  const auto data = testsup::survival_rows({{1, 0}, {2, 1}, {3, 0}});
  const KmCurve curve = km_fit(data);
  const double two_thirds = 1.0 - 1.0 / 3.0;
  REQUIRE(curve.jump_times == std::vector<double>{1.0, 3.0});
  CHECK(curve.survival_after[0] == two_thirds);
  CHECK(curve.survival_after[1] == 0.0);

  CHECK(curve.eval(0.5) == 1.0);
  CHECK(curve.eval(1.0) == two_thirds);  // jump at t included
  CHECK(curve.eval(2.9) == two_thirds);
  bool clipped = false;
  CHECK(curve.eval(3.0, clipped) == curve.floor_epsilon);
  CHECK(clipped);
}

TEST_CASE("censoring curve with tied censoring times") {
  // Two censorings at t=1 with 4 at risk: G(1) = 1/2; the event at t=2 does
  // not move the curve; the last censoring at t=4 sends it to zero.
  const auto data = testsup::survival_rows({{1, 0}, {1, 0}, {2, 1}, {4, 0}});
  const KmCurve curve = km_fit(data);
  REQUIRE(curve.jump_times == std::vector<double>{1.0, 4.0});
  CHECK(curve.eval(1.0) == 0.5);
  CHECK(curve.eval(3.0) == 0.5);
  bool clipped = false;
  CHECK(curve.eval(4.0, clipped) == curve.floor_epsilon);
  CHECK(clipped);
}

TEST_CASE("fully uncensored data gives a flat curve") {
  const auto data = testsup::survival_rows({{1, 1}, {2, 1}, {5, 1}});
  const KmCurve curve = km_fit(data);
  CHECK(curve.jump_times.empty());
  CHECK(curve.eval(100.0) == 1.0);
}

TEST_CASE("clipping floor is configurable and validated") {
  const auto data = testsup::survival_rows({{1, 1}, {2, 0}});
  CHECK_THROWS_AS(km_fit(data, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(km_fit(data, -1.0), std::invalid_argument);
  // The final censoring empties the risk set: the raw curve value is 0.
  const KmCurve curve = km_fit(data, 1e-3);
  bool clipped = false;
  CHECK(curve.eval(2.0, clipped) == 1e-3);
  CHECK(clipped);
  CHECK(curve.eval(1.0) == 1.0);
}

TEST_CASE("curve matches the product formula on random tie-heavy samples") {
  auto engine = civqr::seeded_engine(42);
  std::size_t checks = 0;
  for (int rep = 0; rep < 1200; ++rep) {
    testsup::RandomDataOptions opt;
    opt.tie_heavy = true;
    opt.censor_prob = 0.5;
    const auto data = testsup::random_dataset(engine, opt);
    std::vector<std::pair<double, int>> rows;
    for (std::size_t i = 0; i < data.n(); ++i)
      rows.push_back({data[i].y, data[i].delta ? 1 : 0});
    const KmCurve curve = km_fit(data);
    for (double t : {0.5, 1.0, 2.0, 3.5, 4.0, 10.0}) {
      const double expected = testsup::km_reference(rows, t);
      bool clipped = false;
      const double got = curve.eval(t, clipped);
      if (expected < curve.floor_epsilon) {
        CHECK(got == curve.floor_epsilon);
        CHECK(clipped);
      } else {
        CHECK(got == expected);  // same factors in the same order
      }
      ++checks;
    }
  }
  CHECK(checks >= 6000);
}

TEST_CASE("curve is monotone nonincreasing and bounded") {
  auto engine = civqr::seeded_engine(314);
  for (int rep = 0; rep < 1000; ++rep) {
    testsup::RandomDataOptions opt;
    opt.censor_prob = 0.4;
    const auto data = testsup::random_dataset(engine, opt);
    const KmCurve curve = km_fit(data);
    double prev = 1.0;
    for (std::size_t j = 0; j < curve.jump_times.size(); ++j) {
      CHECK(curve.survival_after[j] <= prev);
      CHECK(curve.survival_after[j] >= 0.0);
      if (j > 0) CHECK(curve.jump_times[j] > curve.jump_times[j - 1]);
      prev = curve.survival_after[j];
    }
  }
}
