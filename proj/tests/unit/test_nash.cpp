#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mfg/errors.hpp"
#include "mfg/models.hpp"
#include "mfg/nash.hpp"
#include "mfg/rng.hpp"
#include "test_models.hpp"

namespace mfg {
namespace {

using testing::scalar_model;

std::vector<std::uint64_t> seeds(int R) {
  std::vector<std::uint64_t> s;
  for (int r = 0; r < R; ++r) s.push_back(rng::derive_seed(99, static_cast<std::uint64_t>(r)));
  return s;
}

TEST(EvaluateCosts, UnitRunningCost) {
  const auto model = scalar_model({.vol = 1.0, .f_const = 1.0, .T = 2.0});
  const auto rep = evaluate_costs(model, iid_profile(constant_strategy({0.0}), 3), {{0.1, 0.2, 0.3}}, seeds(2), 8);
  for (double c : rep.samples) EXPECT_NEAR(c, 2.0, 1e-14);
}

TEST(EvaluateCosts, TerminalSquare) {
  const auto model = scalar_model({.terminal_quad = 1.0});
  const std::vector<std::vector<double>> xi{{0.5, -1.0}, {1.5, 2.0}};
  const auto rep = evaluate_costs(model, iid_profile(constant_strategy({0.0}), 2), xi, seeds(2), 4);
  EXPECT_NEAR(rep.mean[0], (0.25 + 2.25) / 2, 1e-14);
  EXPECT_NEAR(rep.mean[1], (1.0 + 4.0) / 2, 1e-14);
}

TEST(EvaluateCosts, LqOracleFeedbackCost) {
  const LqParams p;
  const auto model = lq_model(p);
  const auto oracle = lq_oracle(p, 4000);
  const std::size_t N = 256;
  const int R = 8;
  const auto psi = feedback_strategy(
      [&](double t, std::span<const double> x, std::span<const double>, std::span<double> g) {
        g[0] = oracle.gain_at(t) * x[0] + oracle.offset_at(t);
      },
      "oracle");
  std::vector<std::vector<double>> xi;
  for (int r = 0; r < R; ++r) {
    const rng::Substream s(static_cast<std::uint64_t>(r), rng::Purpose::kInitial, 0);
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = p.m0_mean + std::sqrt(p.m0_var) * s.normal(i);
    xi.push_back(v);
  }
  const auto rep = evaluate_costs(model, StrategyProfile(N, psi), xi, seeds(R), 128);
  double m = 0.0, var = 0.0;
  const auto n = static_cast<double>(rep.samples.size());
  for (double c : rep.samples) m += c / n;
  for (double c : rep.samples) var += (c - m) * (c - m) / (n - 1);
  const double se = std::sqrt(var / n);
  EXPECT_LE(std::fabs(m - oracle.expected_cost()), 3 * se + 0.01) << m << " vs " << oracle.expected_cost();
}

TEST(DeviationGap, IncumbentCandidateIsExactlyZero) {
  for (const auto& model : {lq_model(LqParams{}), bounded_model(), ou_model()}) {
    const auto psi = constant_strategy({0.3});
    const auto profile = iid_profile(psi, 6);
    const auto r = deviation_gap(model, profile, 2, {psi}, {{0.1, -0.2, 0.3, 0.0, 0.5, -0.6}}, seeds(3), 16);
    EXPECT_EQ(r.epsilon_hat, 0.0);
    for (double g : r.candidates[0].gains) EXPECT_EQ(g, 0.0);
  }
}

TEST(DeviationGap, DeterministicGain) {
  const auto model = scalar_model({.control_gain = 0.0, .cost_gamma = 1.0});
  const double gbar = 0.7;
  const auto r = deviation_gap(model, iid_profile(constant_strategy({gbar}), 1), 0, {constant_strategy({0.0})},
                               {{0.0}}, seeds(2), 8);
  EXPECT_NEAR(r.epsilon_hat, gbar * gbar * model.T, 1e-14);
  EXPECT_EQ(r.best_candidate, 0u);
}

TEST(DeviationGap, RejectsNonNarrowCandidate) {
  const auto model = ou_model();
  const auto fb = feedback_strategy([](double, std::span<const double> x, std::span<const double>,
                                       std::span<double> g) { g[0] = -x[0]; },
                                    "fb");
  EXPECT_THROW(deviation_gap(model, iid_profile(constant_strategy({0.0}), 2), 0, {fb}, {{0.0, 0.0}}, seeds(1), 4),
               InvalidArgument);
}

TEST(IidProfile, Shapes) {
  const auto psi = constant_strategy({0.2});
  EXPECT_EQ(iid_profile(psi, 1).size(), 1u);
  const auto model = ou_model();
  const auto b = simulate_n_player(model, iid_profile(psi, 5), std::vector<double>(5, 0.0), 3, 4);
  for (double g : b.controls) EXPECT_EQ(g, 0.2);
}

TEST(OccupationMeasure, MarginalsMatchBundle) {
  const auto model = lq_model(LqParams{});
  std::mt19937_64 gen(5);
  const auto xi = testing::random_points(gen, 32, 1);
  const auto b = simulate_n_player(model, iid_profile(constant_strategy({-0.1}), 32), xi, 6, 16);
  const auto Q = occupation_measure(b);
  EXPECT_EQ(Q.triples.size(), 32u);
  for (int j = 0; j <= 16; ++j) {
    const auto m = Q.state_marginal(j);
    const auto& f = b.flow.at(static_cast<std::size_t>(j));
    ASSERT_EQ(m.size(), f.size());
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(m.atom(i)[0], f.atom(i)[0]);
  }
  const auto single = occupation_measure(simulate_n_player(model, iid_profile(constant_strategy({0.0}), 1),
                                                           std::vector<double>{0.0}, 1, 4));
  EXPECT_EQ(single.weight(), 1.0);
}

OccupationMeasure constant_occupation(std::size_t players, double x) {
  const TimeGrid grid(1.0, 8);
  OccupationMeasure Q;
  Q.grid = grid;
  for (std::size_t i = 0; i < players; ++i) {
    Q.triples.push_back({std::vector<double>(grid.points(), x), lift(StepControl::constant(grid, std::vector<double>{0.0})),
                         NoisePath(grid, 1, std::vector<double>(8, 0.0))});
  }
  return Q;
}

TEST(Tightness, ZeroPathsGiveZero) {
  EXPECT_EQ(tightness_diagnostic(constant_occupation(3, 0.0), 0.5), 0.0);
  const auto model = scalar_model({});
  const auto b = simulate_n_player(model, iid_profile(constant_strategy({0.0}), 3), std::vector<double>(3, 0.0), 1, 8);
  EXPECT_EQ(condition_statistics(b, 0.5).tightness_statistic, 0.0);
}

TEST(Tightness, ConstantPathOnlySupNormTerm) {
  const double c = -1.3;
  EXPECT_NEAR(tightness_diagnostic(constant_occupation(1, c), 0.5), std::pow(std::fabs(c), 2.5), 1e-12);
  EXPECT_NEAR(tightness_alpha(0.5), 0.5 / 17.0, 1e-15);
}

TEST(Tightness, OrnsteinUhlenbeckFiniteAndStable) {
  const auto model = ou_model();
  std::vector<double> g;
  for (std::size_t N : {32u, 128u, 512u}) {
    const rng::Substream s(1, rng::Purpose::kInitial, N);
    std::vector<double> xi(N);
    for (std::size_t i = 0; i < N; ++i) xi[i] = 0.5 * s.normal(i);
    const auto b = simulate_n_player(model, iid_profile(constant_strategy({0.0}), N), xi, N, 32);
    g.push_back(tightness_diagnostic(occupation_measure(b), 0.5));
    EXPECT_TRUE(std::isfinite(g.back()));
  }
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  EXPECT_LT((*hi - *lo) / *lo, 0.2);
}

TEST(ConditionStatistics, BoundedModelUniformBound) {
  const auto model = bounded_model();
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xi(20);
  for (double& x : xi) x = u(gen);
  const auto b = simulate_n_player(model, iid_profile(constant_strategy({0.9}), 20), xi, 2, 16);
  double sup = 0.0;
  for (double x : xi) sup = std::max(sup, std::fabs(x));
  const auto rep = condition_statistics(b, 0.5);
  EXPECT_LE(rep.tightness_statistic, std::pow(sup, 2.5) + model.T * std::pow(1.0, 2.5) + 1e-12);
  const auto costs = cost_report(model, std::vector<PathBundle>{b});
  const auto with = condition_statistics(b, 0.5, costs);
  EXPECT_TRUE(with.has_costs);
  EXPECT_EQ(with.designated, costs.designated);
}

TEST(OptimalCoupling, IdentityWhenTargetIsOwnEmpirical) {
  const std::vector<double> s{0.3, -1.0, 2.0, 0.3};
  const std::vector<double> theta{0.1, 0.5, 0.9, 0.2};
  const auto r = optimal_coupling(s, empirical_measure(1, s), theta);
  EXPECT_EQ(r.coupled, s);
  EXPECT_EQ(r.cost, 0.0);
}

TEST(OptimalCoupling, MonotoneInOneDimension) {
  const std::vector<double> s{1.0, 0.0};
  const auto r = optimal_coupling(s, empirical_measure(1, std::vector<double>{2.0, 3.0}), std::vector<double>{0.5, 0.5});
  EXPECT_EQ(r.coupled, (std::vector<double>{3.0, 2.0}));
  EXPECT_NEAR(r.cost, 4.0, 1e-15);
  EXPECT_NEAR(r.realized_cost, 4.0, 1e-15);
}

TEST(OptimalCoupling, CostMatchesWasserstein) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 2;
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);
    const std::size_t m = d == 1 ? 1 + static_cast<std::size_t>(trial % 7) : n;
    const auto s = testing::random_points(gen, n, d);
    const auto target = DiscreteMeasure::uniform(d, testing::random_points(gen, m, d));
    std::vector<double> theta(n);
    for (double& t : theta) t = u(gen);
    const auto r = optimal_coupling(s, target, theta);
    const double w = wasserstein2_distance(empirical_measure(d, s), target);
    EXPECT_NEAR(r.cost, w * w, 1e-9);
    if (d == 2) EXPECT_NEAR(r.realized_cost, w * w, 1e-9);
  }
}

TEST(OptimalCoupling, UnequalSizesInHigherDimensionThrow) {
  std::mt19937_64 gen(10);
  const auto s = testing::random_points(gen, 4, 2);
  EXPECT_THROW(optimal_coupling(s, DiscreteMeasure::uniform(2, testing::random_points(gen, 3, 2)),
                                std::vector<double>(4, 0.5)),
               InvalidArgument);
}

}  // namespace
}  // namespace mfg
