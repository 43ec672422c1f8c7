#include <benchmark/benchmark.h>

#include "mfg/dynamics.hpp"
#include "mfg/models.hpp"
#include "mfg/nash.hpp"
#include "mfg/rng.hpp"

namespace {

std::vector<double> initials(std::size_t N) {
  const mfg::rng::Substream s(1, mfg::rng::Purpose::kInitial, 0);
  std::vector<double> xi(N);
  for (std::size_t i = 0; i < N; ++i) xi[i] = 0.5 + 0.2 * s.normal(i);
  return xi;
}

void BM_SimulateNPlayer(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto model = mfg::lq_model(mfg::LqParams{});
  const auto profile = mfg::iid_profile(mfg::constant_strategy({0.1}), N);
  const auto xi = initials(N);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::simulate_n_player(model, profile, xi, 3, 128));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(N) * 128);
}
BENCHMARK(BM_SimulateNPlayer)->RangeMultiplier(4)->Range(8, 512)->Unit(benchmark::kMillisecond);

void BM_TightnessDiagnostic(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto model = mfg::ou_model();
  const auto b = mfg::simulate_n_player(model, mfg::iid_profile(mfg::constant_strategy({0.0}), N), initials(N), 5, 128);
  const auto Q = mfg::occupation_measure(b);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::tightness_diagnostic(Q, 0.5));
}
BENCHMARK(BM_TightnessDiagnostic)->Arg(32)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Philox(benchmark::State& state) {
  const mfg::rng::Substream s(7, mfg::rng::Purpose::kNoise, 0);
  std::uint64_t n = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.normal(n++));
}
BENCHMARK(BM_Philox);

}  // namespace
