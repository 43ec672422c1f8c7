#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfg/errors.hpp"
#include "mfg/measures.hpp"
#include "test_models.hpp"

namespace mfg {
namespace {

using testing::permutation_oracle;
using testing::random_points;

void expect_plan_marginals(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> row(mu.size(), 0.0), col(nu.size(), 0.0);
  for (const auto& e : plan.entries) {
    EXPECT_GE(e.mass, 0.0);
    row[e.source] += e.mass;
    col[e.target] += e.mass;
  }
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(row[i], mu.weight(i), 1e-12);
  for (std::size_t j = 0; j < nu.size(); ++j) EXPECT_NEAR(col[j], nu.weight(j), 1e-12);
}

TEST(EmpiricalMeasure, SinglePointIsDirac) {
  const auto mu = empirical_measure(1, std::vector<double>{2.5});
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_EQ(mu.weight(0), 1.0);
  EXPECT_EQ(mu.atom(0)[0], 2.5);
}

TEST(EmpiricalMeasure, DuplicatesAreKept) {
  const auto mu = empirical_measure(1, std::vector<double>{0.0, 0.0});
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_EQ(mu.weight(0), 0.5);
  EXPECT_EQ(mu.weight(1), 0.5);
  EXPECT_EQ(second_moment(mu), 0.0);
}

TEST(EmpiricalMeasure, SymmetricPairHasUnitSecondMoment) {
  EXPECT_DOUBLE_EQ(second_moment(empirical_measure(1, std::vector<double>{-1.0, 1.0})), 1.0);
}

TEST(EmpiricalMeasure, EmptyInputThrows) {
  EXPECT_THROW(empirical_measure(1, std::vector<double>{}), InvalidArgument);
  try {
    empirical_measure(std::vector<std::vector<double>>{});
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "empty sample");
  }
}

TEST(Wasserstein, Diracs) {
  const double o[1] = {0.0}, a[2] = {1.0, -2.0}, b[2] = {4.0, 2.0};
  EXPECT_EQ(wasserstein2_distance(DiscreteMeasure::dirac(o), DiscreteMeasure::dirac(o)), 0.0);
  EXPECT_NEAR(wasserstein2_distance(DiscreteMeasure::dirac(a), DiscreteMeasure::dirac(b)), 5.0, 1e-12);
}

TEST(Wasserstein, DimensionMismatchThrows) {
  const double a[1] = {0.0}, b[2] = {0.0, 0.0};
  EXPECT_THROW(wasserstein2(DiscreteMeasure::dirac(a), DiscreteMeasure::dirac(b)), InvalidArgument);
}

TEST(Wasserstein, FourAtomCloudsMatchPermutationOracle) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_points(gen, 4, 2), y = random_points(gen, 4, 2);
    const auto mu = DiscreteMeasure::uniform(2, x), nu = DiscreteMeasure::uniform(2, y);
    const auto w = wasserstein2(mu, nu);
    EXPECT_NEAR(w.distance * w.distance, permutation_oracle(x, y, 4, 2), 1e-9);
    expect_plan_marginals(w.plan, mu, nu);
  }
}

TEST(Wasserstein, WeightedPlansHaveCorrectMarginals) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int d = 1; d <= 3; ++d) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 3 + trial % 4, m = 2 + trial % 5;
      std::vector<double> wa(n), wb(m);
      double sa = 0, sb = 0;
      for (double& v : wa) sa += (v = u(gen));
      for (double& v : wb) sb += (v = u(gen));
      for (double& v : wa) v /= sa;
      for (double& v : wb) v /= sb;
      const DiscreteMeasure mu(d, random_points(gen, n, d), wa), nu(d, random_points(gen, m, d), wb);
      const auto w = wasserstein2(mu, nu);
      expect_plan_marginals(w.plan, mu, nu);
      EXPECT_NEAR(w.plan.cost, w.distance * w.distance, 1e-12);
      EXPECT_NEAR(w.distance, wasserstein2_distance(mu, nu), 1e-12);
    }
  }
}

TEST(Wasserstein, MetricAxioms) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> size(1, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 3;
    const auto a = DiscreteMeasure::uniform(d, random_points(gen, static_cast<std::size_t>(size(gen)), d));
    const auto b = DiscreteMeasure::uniform(d, random_points(gen, static_cast<std::size_t>(size(gen)), d));
    const auto c = DiscreteMeasure::uniform(d, random_points(gen, static_cast<std::size_t>(size(gen)), d));
    EXPECT_EQ(wasserstein2_distance(a, a), 0.0);
    EXPECT_NEAR(wasserstein2_distance(a, b), wasserstein2_distance(b, a), 1e-10);
    EXPECT_LE(wasserstein2_distance(a, c), wasserstein2_distance(a, b) + wasserstein2_distance(b, c) + 1e-9);
  }
}

TEST(Wasserstein, EmpiricalInequality) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 12);
    const auto s = random_points(gen, n, d), t = random_points(gen, n, d);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sum += (s[i] - t[i]) * (s[i] - t[i]);
    EXPECT_LE(wasserstein2_distance(empirical_measure(d, s), empirical_measure(d, t)),
              std::sqrt(sum / static_cast<double>(n)) + 1e-12);
  }
}

TEST(Wasserstein, QuantileMatchesTransportSolverInOneDimension) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 9);
    const auto mu = DiscreteMeasure::uniform(1, random_points(gen, n, 1));
    const auto nu = DiscreteMeasure::uniform(1, random_points(gen, n, 1));
    const auto cost = squared_distance_matrix(mu, nu);
    const auto lp = solve_transport(cost, mu.weights(), nu.weights());
    EXPECT_NEAR(monotone_plan_1d(mu, nu).cost, lp.cost, 1e-10);
  }
}

TEST(Wasserstein, AssignmentAndTransportAgree) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const auto mu = DiscreteMeasure::uniform(2, random_points(gen, n, 2));
    const auto nu = DiscreteMeasure::uniform(2, random_points(gen, n, 2));
    const auto cost = squared_distance_matrix(mu, nu);
    const auto perm = solve_assignment(cost, n);
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += cost[i * n + perm[i]];
    EXPECT_NEAR(c / static_cast<double>(n), solve_transport(cost, mu.weights(), nu.weights()).cost, 1e-10);
  }
}

TEST(SecondMoment, MatchesDistanceToOrigin) {
  EXPECT_EQ(second_moment(DiscreteMeasure::dirac(std::vector<double>{0.0})), 0.0);
  std::mt19937_64 gen(7);
  const auto pts = random_points(gen, 10, 2);
  const auto mu = DiscreteMeasure::uniform(2, pts);
  double direct = 0.0;
  for (double v : pts) direct += v * v / 10.0;
  EXPECT_NEAR(second_moment(mu), direct, 1e-12);
  const double w = wasserstein2_distance(mu, DiscreteMeasure::dirac(std::vector<double>{0.0, 0.0}));
  EXPECT_NEAR(w * w, direct, 1e-12);
}

TEST(FlowDistance, DiracFlows) {
  const TimeGrid grid(1.0, 4);
  std::vector<DiscreteMeasure> a, b;
  double expected = 0.0;
  for (int j = 0; j <= 4; ++j) {
    const double t = grid.time(j);
    a.push_back(DiscreteMeasure::dirac(std::vector<double>{std::sin(3 * t)}));
    b.push_back(DiscreteMeasure::dirac(std::vector<double>{t * t}));
    expected = std::max(expected, std::fabs(std::sin(3 * t) - t * t));
  }
  const MeasureFlow fa(grid, a), fb(grid, b);
  EXPECT_EQ(flow_distance(fa, fa), 0.0);
  EXPECT_NEAR(flow_distance(fa, fb), expected, 1e-12);
}

TEST(FlowDistance, ParticleFlowsUsePerSliceOptimalTransport) {
  std::mt19937_64 gen(8);
  const TimeGrid grid(1.0, 3);
  std::vector<DiscreteMeasure> a, b;
  double expected = 0.0;
  for (int j = 0; j <= 3; ++j) {
    const auto x = random_points(gen, 8, 1), y = random_points(gen, 8, 1);
    a.push_back(DiscreteMeasure::uniform(1, x));
    b.push_back(DiscreteMeasure::uniform(1, y));
    expected = std::max(expected, wasserstein2_distance(a.back(), b.back()));
  }
  EXPECT_NEAR(flow_distance(MeasureFlow(grid, a), MeasureFlow(grid, b)), expected, 1e-12);
}

TEST(FlowDistance, GridMismatchThrows) {
  const auto mu = DiscreteMeasure::dirac(std::vector<double>{0.0});
  EXPECT_THROW(flow_distance(MeasureFlow::constant(TimeGrid(1.0, 2), mu), MeasureFlow::constant(TimeGrid(1.0, 3), mu)),
               InvalidArgument);
}

TEST(MeasureFlow, StepFunctionLookup) {
  const auto flow = MeasureFlow::constant(TimeGrid(1.0, 4), DiscreteMeasure::dirac(std::vector<double>{0.0}));
  EXPECT_EQ(flow.index_at(0.0), 0u);
  EXPECT_EQ(flow.index_at(0.26), 1u);
  EXPECT_EQ(flow.index_at(0.5), 2u);
  EXPECT_EQ(flow.index_at(1.0), 4u);
}

TEST(StratifiedResample, PreservesMassAndIsDeterministic) {
  const DiscreteMeasure mu(1, {0.0, 1.0, 2.0}, {0.5, 0.25, 0.25});
  const auto a = stratified_resample(mu, 400, 3, 1);
  const auto b = stratified_resample(mu, 400, 3, 1);
  ASSERT_EQ(a.size(), 400u);
  EXPECT_EQ(std::vector<double>(a.coords().begin(), a.coords().end()),
            std::vector<double>(b.coords().begin(), b.coords().end()));
  EXPECT_NEAR(a.mean()[0], mu.mean()[0], 1.0 / 400);
}

TEST(Mixture, WeightsAndMean) {
  const auto a = DiscreteMeasure::dirac(std::vector<double>{0.0});
  const auto b = DiscreteMeasure::uniform(1, {1.0, 3.0});
  const auto m = mixture(a, b, 0.25);
  EXPECT_EQ(m.size(), 3u);
  EXPECT_NEAR(m.mean()[0], 0.5, 1e-15);
  const std::vector<double> self{4.0};
  const MeasureView v(a, self, 0.5);
  EXPECT_NEAR(v.mean(0), 2.0, 1e-15);
  EXPECT_NEAR(v.second_moment(), 8.0, 1e-15);
}

}  // namespace
}  // namespace mfg
