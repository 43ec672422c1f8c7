#include <benchmark/benchmark.h>

#include <random>

#include "mfg/measures.hpp"

namespace {

mfg::DiscreteMeasure cloud(std::size_t n, int d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<double> p(n * static_cast<std::size_t>(d));
  for (double& v : p) v = z(gen);
  return mfg::DiscreteMeasure::uniform(d, std::move(p));
}

void BM_Wasserstein1d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(n, 1, 1), b = cloud(n, 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::wasserstein2_distance(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Wasserstein1d)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_WassersteinAssignment2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(n, 2, 3), b = cloud(n, 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::wasserstein2_distance(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WassersteinAssignment2d)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_TransportUnequal2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(n, 2, 5), b = cloud(n / 2 + 1, 2, 6);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::wasserstein2_distance(a, b));
}
BENCHMARK(BM_TransportUnequal2d)->RangeMultiplier(2)->Range(16, 128);

void BM_StratifiedResample(benchmark::State& state) {
  const auto mu = cloud(static_cast<std::size_t>(state.range(0)), 1, 7);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::stratified_resample(mu, 1024, 1, 0));
}
BENCHMARK(BM_StratifiedResample)->Arg(2048)->Arg(8192);

}  // namespace

BENCHMARK_MAIN();
