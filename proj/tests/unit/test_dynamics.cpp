#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfg/dynamics.hpp"
#include "mfg/errors.hpp"
#include "mfg/models.hpp"
#include "mfg/nash.hpp"
#include "mfg/parallel.hpp"
#include "test_models.hpp"

namespace mfg {
namespace {

using testing::scalar_model;

std::vector<double> normal_initials(std::size_t N, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return testing::random_points(gen, N, 1);
}

TEST(NoisePath, AntitheticAndCumulative) {
  const TimeGrid grid(1.0, 8);
  const auto w = NoisePath::sample(grid, 2, 5, 3);
  const auto v = NoisePath::sample(grid, 2, 5, 3, -1.0);
  for (std::size_t i = 0; i < w.increments().size(); ++i) EXPECT_EQ(w.increments()[i], -v.increments()[i]);
  EXPECT_EQ(w.at(0)[0], 0.0);
  double sum = 0.0;
  for (int j = 0; j < 8; ++j) sum += w.increment(j)[1];
  EXPECT_NEAR(w.at(8)[1], sum, 1e-14);
}

TEST(SimulateNPlayer, StaticWithoutDriftOrNoise) {
  const auto model = scalar_model({});
  const auto xi = normal_initials(5, 1);
  const auto b = simulate_n_player(model, iid_profile(constant_strategy({0.0}), 5), xi, 9, 10);
  for (int j = 0; j <= 10; ++j) {
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(b.state(j, i)[0], xi[i]);
  }
}

TEST(SimulateNPlayer, UnitDriftIsExact) {
  const auto model = scalar_model({.drift_const = 1.0});
  const auto xi = normal_initials(3, 2);
  const auto b = simulate_n_player(model, iid_profile(constant_strategy({0.0}), 3), xi, 9, 8);
  for (int j = 0; j <= 8; ++j) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(b.state(j, i)[0], xi[i] + b.grid.time(j), 1e-14);
  }
}

TEST(SimulateNPlayer, OrnsteinUhlenbeckVarianceMatchesEulerChain) {
  const auto model = ou_model();
  const std::size_t N = 256;
  const int J = 64;
  const std::vector<double> xi(N, 0.0);
  const auto b = simulate_n_player(model, iid_profile(constant_strategy({0.0}), N), xi, 17, J);
  const double dt = 1.0 / J;
  double v = 0.0;
  for (int j = 0; j < J; ++j) v = (1 - dt) * (1 - dt) * v + dt;
  double m = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) m += b.state(J, i)[0] / N;
  for (std::size_t i = 0; i < N; ++i) s2 += std::pow(b.state(J, i)[0] - m, 2) / (N - 1);
  const double se = v * std::sqrt(2.0 / (N - 1));
  EXPECT_LE(std::fabs(s2 - v), 3 * se);
  EXPECT_NEAR(v, (1 - std::exp(-2.0)) / 2, 5e-3);
  EXPECT_TRUE(moment_certificate(b, model).pass());
}

TEST(SimulateNPlayer, DeterministicAcrossThreadCounts) {
  const auto model = lq_model(LqParams{});
  const auto xi = normal_initials(40, 3);
  const auto profile = iid_profile(constant_strategy({0.2}), 40);
  set_thread_count(1);
  const auto a = simulate_n_player(model, profile, xi, 21, 32);
  set_thread_count(4);
  const auto b = simulate_n_player(model, profile, xi, 21, 32);
  set_thread_count(1);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.controls, b.controls);
  EXPECT_EQ(a.increments, b.increments);
}

TEST(SimulateNPlayer, NonFiniteStateNamesPlayerAndStep) {
  auto model = scalar_model({.drift_lin = 1e300});
  const std::vector<double> xi{1.0, 1e10};
  try {
    simulate_n_player(model, iid_profile(constant_strategy({0.0}), 2), xi, 1, 4);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("player"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(FrozenFlow, SymmetricSlotCancelsLinearControl) {
  const auto model = scalar_model({.control_gain = 1.0, .cost_gamma = 1.0});
  const TimeGrid grid(1.0, 4);
  const auto flow = MeasureFlow::constant(grid, DiscreteMeasure::dirac(std::vector<double>{0.0}));
  std::vector<SlotMeasure> slots(4, SlotMeasure{{0.8, -0.8}, {0.5, 0.5}});
  const RelaxedControlPath r(grid, 1, slots);
  const NoisePath noise(grid, 1, std::vector<double>(4, 0.0));
  const auto path = simulate_frozen_flow(model, flow, r, std::vector<double>{0.3}, noise);
  for (double x : path) EXPECT_NEAR(x, 0.3, 1e-15);
}

TEST(FrozenFlow, LiftedControlMatchesStepControl) {
  const auto model = lq_model(LqParams{});
  const TimeGrid grid(1.0, 16);
  std::mt19937_64 gen(4);
  const StepControl u(grid, 1, testing::random_points(gen, 16, 1));
  const auto flow = MeasureFlow::constant(grid, gaussian_quantile_measure(0.5, 0.2, 32));
  const auto noise = NoisePath::sample(grid, 1, 3, 0);
  const auto a = simulate_frozen_flow(model, flow, u, std::vector<double>{0.1}, noise);
  const auto b = simulate_frozen_flow(model, flow, lift(u), std::vector<double>{0.1}, noise);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(FrozenFlow, LinearFeedbackMeanMatchesOracle) {
  const LqParams p;
  const auto model = lq_model(p);
  const auto oracle = lq_oracle(p, 4000);
  double previous = INFINITY;
  for (int J : {64, 128, 256}) {
    const TimeGrid grid(p.T, J);
    const auto flow = lq_oracle_flow(oracle, grid, 16);
    const auto feedback = feedback_strategy(
        [&](double t, std::span<const double> x, std::span<const double>, std::span<double> g) {
          g[0] = oracle.gain_at(t) * x[0] + oracle.offset_at(t);
        },
        "oracle-feedback");
    // Mean dynamics are linear, so the zero-noise path carries the mean.
    const NoisePath noise(grid, 1, std::vector<double>(static_cast<std::size_t>(J), 0.0));
    const auto path = simulate_frozen_flow(model, flow, *feedback, AgentInit{0, std::vector<double>{p.m0_mean}, 0.0},
                                           noise);
    const double err = std::fabs(path.back() - oracle.mean_at(p.T));
    EXPECT_LE(err, 2.0 / J);
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(Assumptions, ZeroModelPasses) {
  const auto rep = validate_assumptions(scalar_model({}), AssumptionSampler{1}, 500);
  EXPECT_TRUE(rep.ok());
}

TEST(Assumptions, SteepDriftFlagsLipschitz) {
  const auto rep = validate_assumptions(scalar_model({.drift_lin = 2.0, .K = 10.0}), AssumptionSampler{1}, 500);
  EXPECT_FALSE(rep.ok());
  EXPECT_NEAR(rep.lipschitz_b, 2.0, 1e-6);
}

TEST(Assumptions, BenchmarksHaveNoFlags) {
  for (const auto& model : {lq_model(LqParams{}), bounded_model(), ou_model()}) {
    const auto rep = validate_assumptions(model, AssumptionSampler{7}, 2000);
    EXPECT_TRUE(rep.ok()) << model.name << ": " << (rep.flags.empty() ? "" : rep.flags.front());
  }
}

TEST(MomentCertificate, Trivial) {
  const auto model = scalar_model({});
  const auto zero = simulate_n_player(model, iid_profile(constant_strategy({0.0}), 4), std::vector<double>(4, 0.0), 1, 4);
  auto rep = moment_certificate(zero, model);
  EXPECT_EQ(rep.individual_lhs, 0.0);
  EXPECT_TRUE(rep.pass());
  const auto xi = normal_initials(16, 5);
  const auto b = simulate_n_player(model, iid_profile(constant_strategy({0.0}), 16), xi, 1, 4);
  rep = moment_certificate(b, model);
  EXPECT_TRUE(rep.pass());
  double m2 = 0.0;
  for (double x : xi) m2 += x * x / 16.0;
  EXPECT_NEAR(rep.population_lhs, m2, 1e-12);
}

TEST(MomentCertificate, ConstantFormula) {
  EXPECT_NEAR(moment_constant(1.0, 1.0), 12.0 * 2.0 * std::exp(48.0), 1e-9 * std::exp(48.0));
  EXPECT_NEAR(moment_constant(0.5, 0.5), 12.0 * 1.5 * std::exp(24 * 1.5 * 0.25 * 0.5), 1e-9);
}

}  // namespace
}  // namespace mfg
