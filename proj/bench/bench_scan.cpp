// Serial reference path against the OpenMP scan on the same task grid.
#include "eitnsim/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace eitnsim;

namespace {

Scenario setup(const char* name, int nodes, double half_width) {
  Scenario s = scenario(name);
  s.doppler.n_velocity = nodes;
  s.scan.segments = {{-half_width, half_width, 1.0}};
  s.scan.optical_depth_scale = 1.0;
  return s;
}

void BM_ScalarSerial(benchmark::State& state) {
  const Scenario s = setup("fig2b", 128, 20.0);
  const LevelScheme scheme = build_level_scheme(s.scheme);
  for (auto _ : state) benchmark::DoNotOptimize(scan_serial(s.scan, scheme, s.doppler));
}

void BM_ScalarParallel(benchmark::State& state) {
  const Scenario s = setup("fig2b", 128, 20.0);
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const ScanOptions opt{static_cast<int>(state.range(0)), true};
  for (auto _ : state) benchmark::DoNotOptimize(scan(s.scan, scheme, s.doppler, opt));
}

void BM_ZeemanSerial(benchmark::State& state) {
  const Scenario s = setup("fig2d", 16, 2.0);
  const LevelScheme scheme = build_level_scheme(s.scheme);
  for (auto _ : state) benchmark::DoNotOptimize(scan_serial(s.scan, scheme, s.doppler));
}

void BM_ZeemanParallel(benchmark::State& state) {
  const Scenario s = setup("fig2d", 16, 2.0);
  const LevelScheme scheme = build_level_scheme(s.scheme);
  const ScanOptions opt{static_cast<int>(state.range(0)), true};
  for (auto _ : state) benchmark::DoNotOptimize(scan(s.scan, scheme, s.doppler, opt));
}

} // namespace

BENCHMARK(BM_ScalarSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScalarParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ZeemanSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ZeemanParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
