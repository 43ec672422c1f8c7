#include <benchmark/benchmark.h>

#include "mfg/mfg_solver.hpp"
#include "mfg/models.hpp"

namespace {

const mfg::LqParams kParams{};

void BM_BackwardDp(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int nodes = static_cast<int>(state.range(1));
  const auto model = mfg::lq_model(kParams);
  const auto oracle = mfg::lq_oracle(kParams, 2000);
  const int S = 2;
  const auto flow = mfg::lq_oracle_flow(oracle, mfg::TimeGrid(kParams.T, (1 << k) * S), 64);
  const auto cgrid = mfg::build_control_grid(model, 4.0, k);
  const auto sgrid = mfg::StateGrid::uniform(1, -3.0, 3.0, nodes);
  mfg::DpOptions opt;
  opt.k = k;
  opt.substeps = S;
  for (auto _ : state) benchmark::DoNotOptimize(mfg::backward_dp(model, flow, cgrid, sgrid, opt));
  state.counters["actions"] = static_cast<double>(cgrid.size());
}
BENCHMARK(BM_BackwardDp)->Args({3, 101})->Args({4, 101})->Args({4, 201})->Unit(benchmark::kMillisecond);

void BM_PushParticles(benchmark::State& state) {
  const int k = 4, S = 2;
  const auto model = mfg::lq_model(kParams);
  const auto oracle = mfg::lq_oracle(kParams, 2000);
  const auto flow = mfg::lq_oracle_flow(oracle, mfg::TimeGrid(kParams.T, (1 << k) * S), 64);
  mfg::DpOptions opt;
  opt.k = k;
  opt.substeps = S;
  const auto dp = mfg::backward_dp(model, flow, mfg::build_control_grid(model, 4.0, k),
                                   mfg::StateGrid::uniform(1, -3.0, 3.0, 101), opt);
  const auto P = static_cast<std::size_t>(state.range(0));
  const auto init = mfg::initial_particles(mfg::lq_initial_measure(kParams, P), P, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::push_particles(model, flow, dp, init, 1));
}
BENCHMARK(BM_PushParticles)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_SolveMfg(benchmark::State& state) {
  const auto model = mfg::lq_model(kParams);
  mfg::MfgParams params;
  params.k = 3;
  params.substeps = 2;
  params.particles = 512;
  params.sgrid = mfg::StateGrid::uniform(1, -3.0, 3.0, 81);
  params.max_iters = 10;
  const auto m0 = mfg::lq_initial_measure(kParams, params.particles);
  for (auto _ : state) benchmark::DoNotOptimize(mfg::solve_mfg(model, m0, params));
}
BENCHMARK(BM_SolveMfg)->Unit(benchmark::kMillisecond);

void BM_LqOracle(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mfg::lq_oracle(kParams, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_LqOracle)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
