#include <benchmark/benchmark.h>

#include "cml/lattice.hpp"
#include "cml/rng.hpp"
#include "cml/stats.hpp"

namespace {

cml::LatticeState random_state(int n, std::uint64_t seed) {
  cml::Rng rng(seed);
  cml::LatticeState x(n);
  for (double& v : x) v = rng.uniform();
  return x;
}

void bm_step_serial(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto geom = cml::make_geometry(1, {n});
  auto map = cml::decimal_map();
  auto spec = cml::default_collision_spec(1, 0.05);
  auto x = random_state(n, 7);
  cml::LatticeState scratch(n);
  cml::CollisionPairList pairs;
  std::uint64_t t = 0;
  for (auto _ : state) {
    cml::serial::step_inplace(x, scratch, map, spec, geom, pairs, 0x1p-48, 9,
                              t++);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_step_parallel(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto geom = cml::make_geometry(1, {n});
  auto map = cml::decimal_map();
  auto spec = cml::default_collision_spec(1, 0.05);
  auto x = random_state(n, 7);
  cml::LatticeState scratch(n);
  cml::CollisionPairList pairs;
  std::uint64_t t = 0;
  for (auto _ : state) {
    cml::step_inplace(x, scratch, map, spec, geom, pairs, 0x1p-48, 9, t++);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_time_correlation(benchmark::State& state) {
  cml::TrajectorySource src;
  src.map = cml::decimal_map();
  src.geometry = cml::make_geometry(1, {64});
  src.coupling = cml::default_collision_spec(1, 0.05);
  src.seed = 11;
  src.steps = static_cast<long long>(state.range(0));
  src.burn_in = 100;
  src.dither = 0x1p-48;
  cml::Observable phi, psi;
  for (auto _ : state) {
    auto series = cml::time_correlation(src, phi, psi, 5);
    benchmark::DoNotOptimize(series.values.data());
  }
  state.SetItemsProcessed(state.iterations() * src.steps);
}

void bm_space_time_correlation(benchmark::State& state) {
  cml::TrajectorySource src;
  src.map = cml::decimal_map();
  src.geometry = cml::make_geometry(1, {64});
  src.coupling = cml::default_collision_spec(1, 0.05);
  src.seed = 11;
  src.steps = static_cast<long long>(state.range(0));
  src.burn_in = 100;
  src.dither = 0x1p-48;
  cml::Observable phi, psi;
  phi.support = {0, 1};
  for (auto _ : state) {
    auto series = cml::space_time_correlation(src, phi, psi, 5, {0, 1, 2, 3});
    benchmark::DoNotOptimize(series[0].values.data());
  }
  state.SetItemsProcessed(state.iterations() * src.steps * 64);
}

}  // namespace

BENCHMARK(bm_step_serial)->Arg(64)->Arg(4096)->Arg(65536);
BENCHMARK(bm_step_parallel)->Arg(64)->Arg(4096)->Arg(65536);
BENCHMARK(bm_time_correlation)->Arg(10000);
BENCHMARK(bm_space_time_correlation)->Arg(10000);

BENCHMARK_MAIN();
