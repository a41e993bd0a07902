#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "civqr/inference.hpp"
#include "civqr/km.hpp"
#include "civqr/moment.hpp"
#include "civqr/rng.hpp"
#include "civqr/simlab.hpp"

namespace {

civqr::Dataset make_data(std::size_t n) {
  civqr::SimDesign d;
  d.design_id = 1;
  d.lambda = 0.176;  // about 40% censoring
  d.n = n;
  d.u = 0.5;
  d.seed = 2024;
  return civqr::gen_design(d);
}

civqr::FitConfig make_fit_config(int n_starts, std::uint64_t seed) {
  civqr::OptimConfig oc;
  oc.box_lower = {0.0, 0.0, 0.0};
  oc.box_upper = {1.0, 1.0, 1.0};
  oc.n_starts = n_starts;
  oc.seed = seed;
  return civqr::FitConfig{civqr::QuantileLevel(0.5), oc};
}

void BM_km_fit(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(civqr::km_fit(data));
}
BENCHMARK(BM_km_fit)->Arg(500)->Arg(1000)->Arg(5000);

void BM_objective(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)));
  const auto curve = civqr::km_fit(data);
  const civqr::MomentContext ctx(data, curve, civqr::QuantileLevel(0.5));
  const std::vector<double> beta{0.5, 0.5, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(ctx.objective(beta));
}
BENCHMARK(BM_objective)->Arg(500)->Arg(1000);

void BM_moment_context_build(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)));
  const auto curve = civqr::km_fit(data);
  for (auto _ : state) {
    civqr::MomentContext ctx(data, curve, civqr::QuantileLevel(0.5));
    benchmark::DoNotOptimize(ctx.n());
  }
}
BENCHMARK(BM_moment_context_build)->Arg(500)->Arg(1000);

void BM_fit_100_starts(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)));
  const auto cfg = make_fit_config(100, 7);
  for (auto _ : state) benchmark::DoNotOptimize(civqr::fit(data, cfg));
}
BENCHMARK(BM_fit_100_starts)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_bootstrap_replicate(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)));
  const auto cfg = make_fit_config(10, 7);
  std::uint64_t r = 0;
  for (auto _ : state) {
    auto engine = civqr::seeded_engine(7, r++, 0);
    std::size_t n_redraws = 0;
    const auto resample = civqr::draw_bootstrap_resample(engine, data, n_redraws);
    benchmark::DoNotOptimize(civqr::fit(resample, cfg));
  }
}
BENCHMARK(BM_bootstrap_replicate)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
