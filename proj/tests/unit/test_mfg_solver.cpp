#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mfg/errors.hpp"
#include "mfg/mfg_solver.hpp"
#include "mfg/models.hpp"
#include "mfg/nash.hpp"
#include "test_models.hpp"

namespace mfg {
namespace {

using testing::scalar_model;

MeasureFlow dirac_flow(const TimeGrid& grid, double x = 0.0) {
  return MeasureFlow::constant(grid, DiscreteMeasure::dirac(std::vector<double>{x}));
}

TEST(Quadrature, GaussHermiteMoments) {
  const auto q = gauss_hermite(7);
  double m0 = 0, m2 = 0, m4 = 0, m6 = 0, m1 = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double z = q.points[i], w = q.weights[i];
    EXPECT_GT(w, 0.0);
    m0 += w;
    m1 += w * z;
    m2 += w * z * z;
    m4 += w * std::pow(z, 4);
    m6 += w * std::pow(z, 6);
  }
  EXPECT_NEAR(m0, 1.0, 1e-13);
  EXPECT_NEAR(m1, 0.0, 1e-13);
  EXPECT_NEAR(m2, 1.0, 1e-12);
  EXPECT_NEAR(m4, 3.0, 1e-11);
  EXPECT_NEAR(m6, 15.0, 1e-10);
}

TEST(StateGrid, InterpolationIsExactForLinearFunctions) {
  const StateGrid g({-1.0, 0.0}, {1.0, 2.0}, {5, 3});
  std::vector<double> v(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto x = g.node(n);
    v[n] = 2 * x[0] - x[1] + 0.5;
  }
  const double x[2] = {0.13, 1.71};
  EXPECT_NEAR(g.interpolate(v, x), 2 * 0.13 - 1.71 + 0.5, 1e-14);
  const double outside[2] = {5.0, -3.0};
  EXPECT_NEAR(g.interpolate(v, outside), 2 * 1.0 - 0.0 + 0.5, 1e-14);
  EXPECT_EQ(g.nearest(std::vector<double>{-0.75, 1.0}), 0u * 3 + 1);
}

TEST(ControlLattice, SpacingRule) {
  EXPECT_EQ(control_lattice_spacing(1, 1), 1.0);
  EXPECT_EQ(control_lattice_spacing(2, 1), 0.25);
  EXPECT_EQ(control_lattice_spacing(3, 1), 1.0 / 16);
  for (int k = 1; k <= 8; ++k) {
    for (int d = 1; d <= 3; ++d) EXPECT_LE(control_lattice_spacing(k, d) * std::sqrt(d), 1.0 / k);
  }
}

TEST(BackwardDp, ZeroCostsGiveZeroValue) {
  const auto model = scalar_model({.drift_lin = -0.5, .vol = 0.3, .control_gain = 1.0});
  const auto sgrid = StateGrid::uniform(1, -2, 2, 21);
  const auto cgrid = build_control_grid(model, 1.0, 2);
  const auto dp = backward_dp(model, dirac_flow(TimeGrid(1.0, 4)), cgrid, sgrid, DpOptions{.k = 2, .substeps = 2});
  for (double v : dp.value.values) EXPECT_EQ(v, 0.0);
  for (auto a : dp.policy.index) EXPECT_EQ(a, 0u);
}

TEST(BackwardDp, TerminalSliceIsTerminalCostAndValuesAreNonnegative) {
  const auto model = lq_model(LqParams{});
  const auto sgrid = StateGrid::uniform(1, -3, 3, 41);
  const auto cgrid = build_control_grid(model, 3.0, 3);
  const auto flow = dirac_flow(TimeGrid(1.0, 8), 0.4);
  const auto dp = backward_dp(model, flow, cgrid, sgrid, DpOptions{.k = 3, .substeps = 2});
  const auto last = dp.value.slice(dp.value.slices - 1);
  for (std::size_t n = 0; n < sgrid.size(); ++n) {
    const auto x = sgrid.node(n);
    EXPECT_EQ(last[n], model.terminal_cost(x, flow.at_time(1.0)));
  }
  for (double v : dp.value.values) EXPECT_GE(v, 0.0);
  for (auto a : dp.policy.index) EXPECT_LT(a, cgrid.size());
}

TEST(BackwardDp, NonFiniteCostNamesTheCell) {
  auto model = scalar_model({.control_gain = 1.0, .cost_gamma = 1.0});
  model.running_cost = [](double, std::span<const double> x, const MeasureView&, std::span<const double>) {
    return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  };
  try {
    backward_dp(model, dirac_flow(TimeGrid(1.0, 2)), build_control_grid(model, 1.0, 1),
                StateGrid::uniform(1, -1, 1, 5), DpOptions{.k = 1, .substeps = 1});
    FAIL();
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("j="), std::string::npos);
    EXPECT_NE(msg.find("node="), std::string::npos);
    EXPECT_NE(msg.find("atom="), std::string::npos);
  }
}

TEST(BackwardDp, LqValueApproachesOracle) {
  const LqParams p;
  const auto model = lq_model(p);
  const auto oracle = lq_oracle(p, 4000);
  double previous = INFINITY;
  for (const auto& [k, n, S] : {std::tuple{2, 51, 1}, std::tuple{3, 101, 2}, std::tuple{4, 101, 2}}) {
    const auto sgrid = StateGrid::uniform(1, -3, 3, n);
    const auto dp0 = DpOptions{.k = k, .substeps = S};
    const TimeGrid fine(p.T, (1 << k) * S);
    const auto flow = lq_oracle_flow(oracle, fine, 32);
    const auto dp = backward_dp(model, flow, build_control_grid(model, 4.0, k), sgrid, dp0);
    double err = 0.0;
    for (double x = -1.5; x <= 1.5; x += 0.25) err = std::max(err, std::fabs(dp.value_at(0, std::vector<double>{x}) - oracle.value(0, x)));
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 0.06);
}

TEST(NoiseFeedback, ConstantPolicyPlaysItsAtom) {
  const auto model = scalar_model({.drift_lin = -1.0, .vol = 1.0, .control_gain = 1.0, .cost_gamma = 1.0});
  const TimeGrid grid(1.0, 4);
  auto flow = std::make_shared<const MeasureFlow>(dirac_flow(grid));
  auto dp = backward_dp(model, *flow, build_control_grid(model, 1.0, 2), StateGrid::uniform(1, -2, 2, 9),
                        DpOptions{.k = 2, .substeps = 1});
  std::fill(dp.policy.index.begin(), dp.policy.index.end(), 3u);
  const double expected = dp.cgrid.atom(3)[0];
  const auto psi = noise_feedback_strategy(model, flow, std::make_shared<const DpResult>(dp));
  EXPECT_TRUE(psi->narrow());
  std::vector<double> controls;
  const TimeGrid sim(1.0, 16);
  simulate_frozen_flow(model, dirac_flow(sim), *psi, AgentInit{0, std::vector<double>{0.3}, 0.0},
                       NoisePath::sample(sim, 1, 4, 2), &controls);
  for (double g : controls) EXPECT_EQ(g, expected);
}

TEST(NoiseFeedback, FrozenStateReadsNodePolicy) {
  auto model = scalar_model({.vol = 1.0, .control_gain = 0.0, .cost_gamma = 1.0});
  model.drift = [](double, std::span<const double>, const MeasureView&, std::span<const double>, std::span<double> out) {
    out[0] = 0.0;
  };
  const TimeGrid grid(1.0, 4);
  auto flow = std::make_shared<const MeasureFlow>(dirac_flow(grid));
  const auto sgrid = StateGrid::uniform(1, -2, 2, 9);
  auto dp = backward_dp(model, *flow, build_control_grid(model, 1.0, 2), sgrid, DpOptions{.k = 2, .substeps = 1});
  const std::size_t node = sgrid.nearest(std::vector<double>{0.6});
  for (int j = 0; j < 4; ++j) dp.policy.index[static_cast<std::size_t>(j) * dp.policy.nodes + node] = static_cast<std::uint32_t>(j);
  const auto psi = noise_feedback_strategy(model, flow, std::make_shared<const DpResult>(dp));
  std::vector<double> controls;
  const NoisePath zero(grid, 1, std::vector<double>(4, 0.0));
  simulate_frozen_flow(model, *flow, *psi, AgentInit{0, std::vector<double>{0.6}, 0.0}, zero, &controls);
  for (int j = 0; j < 4; ++j) EXPECT_EQ(controls[static_cast<std::size_t>(j)], dp.cgrid.atom(static_cast<std::size_t>(j))[0]);
}

TEST(NoiseFeedback, IncompatibleNoiseGridThrows) {
  const auto model = scalar_model({.vol = 1.0, .control_gain = 1.0, .cost_gamma = 1.0});
  const TimeGrid grid(1.0, 4);
  auto flow = std::make_shared<const MeasureFlow>(dirac_flow(grid));
  auto dp = std::make_shared<const DpResult>(backward_dp(model, *flow, build_control_grid(model, 1.0, 2),
                                                         StateGrid::uniform(1, -2, 2, 9), DpOptions{.k = 2, .substeps = 1}));
  const auto psi = noise_feedback_strategy(model, flow, dp);
  const TimeGrid odd(1.0, 6);
  EXPECT_THROW(simulate_frozen_flow(model, dirac_flow(odd), *psi, AgentInit{0, std::vector<double>{0.0}, 0.0},
                                    NoisePath::sample(odd, 1, 1, 0)),
               InvalidArgument);
}

TEST(Monotonicity, ZeroCostRowsAreZero) {
  const auto model = scalar_model({.vol = 0.5, .control_gain = 1.0});
  const auto t = value_monotonicity_study(model, dirac_flow(TimeGrid(1.0, 1)), StateGrid::uniform(1, -2, 2, 11),
                                          {1, 2}, std::vector<double>{-1.0, 0.0, 1.0}, 1, NoiseRule{});
  for (const auto& row : t.rows) {
    for (double v : row.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(Monotonicity, LqColumnsNonincreasing) {
  const LqParams p;
  const auto model = lq_model(p);
  const auto oracle = lq_oracle(p, 2000);
  const auto flow = lq_oracle_flow(oracle, TimeGrid(p.T, 16), 16);
  const auto t = value_monotonicity_study(model, flow, StateGrid::uniform(1, -3, 3, 61), {1, 2, 3},
                                          std::vector<double>{-1.0, 0.0, 1.0}, 1, NoiseRule{});
  EXPECT_TRUE(t.nonincreasing(1e-6)) << t.max_increase;
  for (std::size_t i = 0; i < 3; ++i) EXPECT_GT(t.rows.back().values[i], oracle.value(0, t.probes[i]) - 0.05);
}

TEST(SolveMfg, BrownianMarginals) {
  auto model = scalar_model({.vol = 1.0, .control_gain = 0.0, .cost_gamma = 1.0});
  model.gamma_set = ControlSet::whole_space(1);
  MfgParams params;
  params.particles = 2000;
  params.k = 3;
  params.substeps = 2;
  params.M = 1.0;
  params.max_iters = 3;
  params.sgrid = StateGrid::uniform(1, -4, 4, 41);
  const auto sol = solve_mfg(model, DiscreteMeasure::dirac(std::vector<double>{0.0}), params);
  for (std::size_t j = 0; j < sol.flow.size(); ++j) {
    const double t = sol.flow.times()[j];
    const double se = std::sqrt(2.0 * t * t / params.particles);
    EXPECT_LE(std::fabs(sol.flow.at(j).second_moment() - t), 3 * se + 1e-12) << "t=" << t;
  }
}

TEST(SolveMfg, DecoupledProblemSettlesAfterOnePass) {
  LqParams p;
  p.abar = 0.0;
  p.kappa = 0.0;
  p.kappaT = 0.0;
  const auto model = lq_model(p);
  MfgParams params;
  params.particles = 256;
  params.k = 3;
  params.substeps = 2;
  params.damping = 1.0;
  params.max_iters = 4;
  params.tol = 1e-12;
  params.sgrid = StateGrid::uniform(1, -3, 3, 61);
  const auto sol = solve_mfg(model, lq_initial_measure(p, 256), params);
  ASSERT_GE(sol.history.size(), 2u);
  EXPECT_LE(sol.history[1].residual, 1e-12);
  EXPECT_TRUE(sol.converged);
}

TEST(SolveMfg, LqMatchesOracleAndIsSelfConsistent) {
  const LqParams p;
  const auto model = lq_model(p);
  MfgParams params;
  params.particles = 1024;
  params.k = 4;
  params.substeps = 2;
  params.tol = 1e-3;
  params.sgrid = StateGrid::uniform(1, -3, 3, 121);
  const auto sol = solve_mfg(model, lq_initial_measure(p, params.particles), params);
  EXPECT_TRUE(sol.converged);
  const auto oracle = lq_oracle(p, 4000);
  for (std::size_t j = 0; j < sol.flow.size(); ++j) {
    EXPECT_NEAR(sol.flow.at(j).mean()[0], oracle.mean_at(sol.flow.times()[j]), 0.02);
  }
  EXPECT_GE(sol.optimality_gap, -3.0 * sol.particles.cost_se);
  for (std::size_t j = 0; j < sol.flow.size(); ++j) {
    const auto& slice = sol.particles.flow.at(j);
    EXPECT_EQ(slice.size(), params.particles);
  }
}

TEST(SolveMfg, InvalidParametersThrow) {
  const auto model = lq_model(LqParams{});
  MfgParams params;
  params.particles = 3;
  EXPECT_THROW(solve_mfg(model, lq_initial_measure(LqParams{}, 8), params), InvalidArgument);
  params.particles = 4;
  params.damping = 0.0;
  EXPECT_THROW(solve_mfg(model, lq_initial_measure(LqParams{}, 8), params), InvalidArgument);
}

}  // namespace
}  // namespace mfg
