// FFT kernels against the serial references, and dock_pair across thread counts.

#include <thread>

#include <benchmark/benchmark.h>

#include "fftdock/correlate.hpp"
#include "fftdock/docking.hpp"
#include "fftdock/reference.hpp"
#include "fixtures.hpp"

using namespace fftdock;

namespace {

void BM_FftCorrelate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DockGrid r = fixtures::random_grid(1, n, true);
  const DockGrid l = fixtures::random_grid(2, n, true, GridRole::ligand);
  for (auto _ : state) benchmark::DoNotOptimize(fft_correlate(r, l));
}
BENCHMARK(BM_FftCorrelate)->Arg(8)->Arg(12)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_DirectCorrelate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DockGrid r = fixtures::random_grid(1, n, true);
  const DockGrid l = fixtures::random_grid(2, n, true, GridRole::ligand);
  for (auto _ : state) benchmark::DoNotOptimize(reference::direct_correlate(r, l));
}
BENCHMARK(BM_DirectCorrelate)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMicrosecond);

struct Pair {
  Structure receptor = fixtures::random_blob(11, 300, 12.0, "rec");
  Structure ligand = fixtures::random_blob(12, 80, 6.0, "lig");
};

const Pair& pair() {
  static const Pair p;
  return p;
}

// range(0) threads, 0 = every logical core
void BM_DockPair(benchmark::State& state) {
  DockConfig config;
  config.angular_step = 45;
  config.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dock_pair(pair().receptor, pair().ligand, config));
  state.counters["threads"] = config.resolved_threads();
}
BENCHMARK(BM_DockPair)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_ExhaustiveReference(benchmark::State& state) {
  const Structure rec = fixtures::random_blob(21, 12, 3.0, "rec");
  const Structure lig = fixtures::random_blob(22, 4, 1.5, "lig");
  DockConfig config;
  config.angular_step = 90;
  config.margin_voxels = 1;
  config.top_k = 10;
  for (auto _ : state) benchmark::DoNotOptimize(reference::exhaustive_top_poses(rec, lig, config, 10));
}
BENCHMARK(BM_ExhaustiveReference)->Unit(benchmark::kMillisecond);

void BM_DockPairSmall(benchmark::State& state) {
  const Structure rec = fixtures::random_blob(21, 12, 3.0, "rec");
  const Structure lig = fixtures::random_blob(22, 4, 1.5, "lig");
  DockConfig config;
  config.angular_step = 90;
  config.margin_voxels = 1;
  config.top_k = 10;
  config.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(dock_pair(rec, lig, config));
}
BENCHMARK(BM_DockPairSmall)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
