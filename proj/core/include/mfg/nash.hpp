#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfg/dynamics.hpp"
#include "mfg/measures.hpp"
#include "mfg/model.hpp"
#include "mfg/relaxed_controls.hpp"

namespace mfg {

// Realized cost of every player along one simulated bundle:
// sum_j f(t_j, X_i, mu^N(t_j), u_i) dt + F(X_i(T), mu^N(T)).
std::vector<double> realized_costs(const ModelSpec& model, const PathBundle& bundle);

struct CostReport {
  std::size_t players = 0;
  int repetitions = 0;
  std::vector<double> samples;  // samples[r * N + i]
  std::vector<double> mean;     // per player
  std::vector<double> se;       // per player, over repetitions
  double mean_cost = 0.0;       // over players
  std::size_t designated = 0;   // player with the median mean cost
  double spread = 0.0;          // max_i |mean_i - mean_cost|
};

// Costs of independent repetitions of one setup (same N in every bundle).
CostReport cost_report(const ModelSpec& model, std::span<const PathBundle> bundles);

// One repetition per seed; initials holds either one set of N initial states
// shared by all repetitions or one set per repetition.
CostReport evaluate_costs(const ModelSpec& model, const StrategyProfile& profile,
                          const std::vector<std::vector<double>>& initials, std::span<const std::uint64_t> seeds,
                          int steps);

struct CandidateGap {
  std::vector<double> gains;  // per repetition, averaged over the deviating players
  double mean_gain = 0.0;  // mean over repetitions of J_i(u) - J_i([u^-i, v])
  double se = 0.0;         // standard error of the paired differences
  double mean_cost = 0.0;  // J_i([u^-i, v])
};

// Lower bound on the best improvement available to player i within the
// candidate family, estimated with common random numbers.
struct DeviationResult {
  double epsilon_hat = 0.0;
  std::size_t best_candidate = 0;
  double best_se = 0.0;
  double incumbent_cost = 0.0;
  std::vector<std::size_t> players;
  std::vector<CandidateGap> candidates;
  std::vector<double> incumbent_samples;  // J_i(u) per repetition
};

DeviationResult deviation_gap(const ModelSpec& model, const StrategyProfile& profile, std::size_t player,
                              const std::vector<StrategyPtr>& candidates,
                              const std::vector<std::vector<double>>& initials, std::span<const std::uint64_t> seeds,
                              int steps);
// Several players deviate, one at a time, each against the incumbent
// profile on the same seeds. Gains and incumbent costs are averaged over the
// deviators within a repetition; standard errors are taken over repetitions.
// For exchangeable profiles this estimates the same gap as a single deviator.
DeviationResult deviation_gap(const ModelSpec& model, const StrategyProfile& profile,
                              std::span<const std::size_t> players, const std::vector<StrategyPtr>& candidates,
                              const std::vector<std::vector<double>>& initials, std::span<const std::uint64_t> seeds,
                              int steps);

// N copies of a narrow strategy, each wired to its own player's data.
StrategyProfile iid_profile(const StrategyPtr& psi, std::size_t N);

struct OccupationTriple {
  std::vector<double> states;  // (J+1) * d
  RelaxedControlPath control;
  NoisePath noise;
};

// Uniform measure over the players' (state path, relaxed control, noise) triples.
struct OccupationMeasure {
  TimeGrid grid;
  int d = 1;
  std::vector<OccupationTriple> triples;
  double weight() const { return 1.0 / static_cast<double>(triples.size()); }
  // Push-forward through the state at t_j.
  DiscreteMeasure state_marginal(int j) const;
};

OccupationMeasure occupation_measure(const PathBundle& bundle);

// alpha = delta0 / (2 (8 + delta0)).
double tightness_alpha(double delta0);
// The tightness functional with path moduli over grid pairs and lags
// h in {dt, 2 dt, ..., min(1, T)}.
double tightness_diagnostic(const OccupationMeasure& Q, double delta0);
double tightness_diagnostic(const OccupationMeasure& Q, double delta0, double alpha);

struct ConditionReport {
  // (1/N) sum_i (|xi_i|^{2+delta0} + sum_j |u_ij|^{2+delta0} dt)
  double tightness_statistic = 0.0;
  bool has_costs = false;
  std::size_t designated = 0;
  double designated_cost = 0.0;
  double mean_cost = 0.0;
  double spread = 0.0;
};

ConditionReport condition_statistics(const PathBundle& bundle, double delta0);
ConditionReport condition_statistics(const PathBundle& bundle, double delta0, const CostReport& costs);

struct CouplingResult {
  std::vector<double> coupled;  // one target point per input point
  TransportPlan plan;           // exact optimal plan from emp(sample) to target
  double cost = 0.0;            // plan cost = d2(emp(sample), target)^2
  double realized_cost = 0.0;   // (1/N) sum |xi_i - coupled_i|^2
};

// d = 1: randomized quantile coupling, u_i = (rank_i + theta_i) / N with ranks
// ordered by (value, theta); d > 1: optimal assignment, which needs target to
// be uniform on exactly N atoms.
CouplingResult optimal_coupling(std::span<const double> sample, const DiscreteMeasure& target,
                                std::span<const double> theta);

}  // namespace mfg
