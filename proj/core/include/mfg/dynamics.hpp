#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfg/measures.hpp"
#include "mfg/model.hpp"
#include "mfg/relaxed_controls.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Brownian increments on a uniform grid plus the cumulative path, W(0) = 0.
class NoisePath {
 public:
  NoisePath() = default;
  NoisePath(TimeGrid grid, int dim, std::vector<double> increments);
  // Increments sqrt(dt) * Z from substream (seed, noise, stream); sign = -1
  // gives the antithetic path.
  static NoisePath sample(TimeGrid grid, int dim, std::uint64_t seed, std::uint64_t stream, double sign = 1.0);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::span<const double> increment(int j) const {
    return {increments_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> increments() const { return increments_; }
  // W(t_j).
  std::span<const double> at(int j) const {
    return {path_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> path() const { return path_; }

 private:
  TimeGrid grid_;
  int dim_ = 1;
  std::vector<double> increments_;
  std::vector<double> path_;
};

// Fixed per-player data handed to a strategy when it is instantiated.
struct AgentInit {
  std::size_t player = 0;
  std::span<const double> xi;
  double theta = 0.0;
};

// What a player may look at when choosing the action for [t_step, t_step+1).
// increments covers slots [0, step) only. own_state and all_states are empty
// for narrow strategies.
struct Observation {
  int step = 0;
  double t = 0.0;
  const TimeGrid* grid = nullptr;
  std::span<const double> increments;
  std::span<const double> own_state;
  std::span<const double> all_states;
};

// Per-player running instance of a strategy; may keep internal state between
// steps (it is always queried at consecutive steps from 0).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void act(const Observation& obs, std::span<double> gamma) = 0;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  // Narrow strategies only see (t, xi, theta, own noise history).
  virtual bool narrow() const = 0;
  virtual std::unique_ptr<Agent> spawn(const AgentInit& init) const = 0;
  virtual std::string name() const = 0;
};

using StrategyPtr = std::shared_ptr<const Strategy>;
using StrategyProfile = std::vector<StrategyPtr>;

// Narrow, deterministic: gamma(t) = u(t).
StrategyPtr constant_strategy(std::vector<double> gamma);
StrategyPtr open_loop_strategy(StepControl u);

// Full-information Markov feedback gamma = phi(t, own state, all states).
using FeedbackFn =
    std::function<void(double t, std::span<const double> x, std::span<const double> all, std::span<double> gamma)>;
StrategyPtr feedback_strategy(FeedbackFn phi, std::string name);

// Simulated N-player system. Layouts: states[(j*N + i)*d + c] for j = 0..J,
// controls[(j*N + i)*d2 + c] and increments[(i*J + j)*d1 + c] for j < J.
struct PathBundle {
  TimeGrid grid;
  int d = 1;
  int d1 = 1;
  int d2 = 1;
  std::size_t players = 0;
  std::vector<double> initials;
  std::vector<double> theta;
  std::vector<double> states;
  std::vector<double> controls;
  std::vector<double> increments;
  MeasureFlow flow;

  std::span<const double> state(int j, std::size_t i) const {
    return {states.data() + (static_cast<std::size_t>(j) * players + i) * static_cast<std::size_t>(d),
            static_cast<std::size_t>(d)};
  }
  std::span<const double> control(int j, std::size_t i) const {
    return {controls.data() + (static_cast<std::size_t>(j) * players + i) * static_cast<std::size_t>(d2),
            static_cast<std::size_t>(d2)};
  }
  std::vector<double> state_path(std::size_t i) const;
  StepControl control_path(std::size_t i) const;
  NoisePath noise(std::size_t i) const;
};

// Noise of player i comes from substream (seed, noise, i) and theta_i from
// (seed, theta, i), so the bundle is a pure function of the inputs.
PathBundle simulate_n_player(const ModelSpec& model, const StrategyProfile& profile,
                             std::span<const double> initials, std::uint64_t seed, int steps);

// Single agent under a frozen flow. Returns the state path ((J+1)*d values).
std::vector<double> simulate_frozen_flow(const ModelSpec& model, const MeasureFlow& flow, const StepControl& u,
                                         std::span<const double> x0, const NoisePath& noise);
std::vector<double> simulate_frozen_flow(const ModelSpec& model, const MeasureFlow& flow,
                                         const RelaxedControlPath& r, std::span<const double> x0,
                                         const NoisePath& noise);
// Same with the control produced on the fly by a strategy; the realized
// controls are written to `controls` (J*d2 values) when it is non-null.
std::vector<double> simulate_frozen_flow(const ModelSpec& model, const MeasureFlow& flow, const Strategy& strategy,
                                         const AgentInit& init, const NoisePath& noise,
                                         std::vector<double>* controls = nullptr);

// sum_j f(t_j, X_j, flow(t_j), u_j) dt + F(X_J, flow(T)) along a frozen-flow path.
double frozen_flow_cost(const ModelSpec& model, const MeasureFlow& flow, std::span<const double> states,
                        std::span<const double> controls, const TimeGrid& grid);

struct AssumptionSampler {
  std::uint64_t seed = 0;
  double state_scale = 3.0;
  double action_scale = 3.0;
  int measure_atoms = 6;
};

// Largest sampled ratios against the declared constants. A flag is raised
// when a ratio exceeds its bound; passing is evidence, not proof.
struct AssumptionReport {
  double growth_b = 0.0;        // |b| / (1 + |x| + |gamma| + sqrt(m2)), vs K
  double growth_sigma = 0.0;    // |sigma| / (1 + |x| + sqrt(m2)), vs K
  double lipschitz_b = 0.0;     // |b - b~| / (|x - x~| + d2), vs L
  double lipschitz_sigma = 0.0; // same for sigma, vs L
  double growth_cost = 0.0;     // max(f, F) / (1 + |x|^2 + |gamma|^2 + m2), vs K
  double local_lip_cost = 0.0;  // (|f - f~| + |F - F~|) / ((|x-x~| + d2)(1 + |x| + |x~| + ...)), vs L
  double min_f = 0.0;
  double min_F = 0.0;
  double coercivity = 0.0;      // min f / |gamma|^2 over sampled |gamma| > r0, vs c0
  int coercivity_samples = 0;
  std::vector<std::string> flags;
  bool ok() const { return flags.empty(); }
};

AssumptionReport validate_assumptions(const ModelSpec& model, const AssumptionSampler& sampler, int n_samples);

// C_{T,K} = 12 (T v 1)(T + 1)(K v 1)^2 exp(24 (T + 1) K^2 T).
double moment_constant(double T, double K);

// Second-moment bounds for the N-player system with expectations estimated
// by averaging over the given bundles (independent replicates of one setup).
struct MomentReport {
  double constant = 0.0;
  // Per-player bound, reported for the player with the largest lhs / rhs.
  std::size_t worst_player = 0;
  double individual_lhs = 0.0;
  double individual_rhs = 0.0;
  bool individual_pass = false;
  // Population bound: sup_j E[(1/N) sum |X_j|^2] (which dominates
  // sup_j E[d2(mu^N, delta_0)^2]).
  double population_lhs = 0.0;
  double population_rhs = 0.0;
  bool population_pass = false;
  bool pass() const { return individual_pass && population_pass; }
};

MomentReport moment_certificate(std::span<const PathBundle> bundles, const ModelSpec& model);
MomentReport moment_certificate(const PathBundle& bundle, const ModelSpec& model);

}  // namespace mfg
