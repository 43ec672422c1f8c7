#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mfg/dynamics.hpp"
#include "mfg/measures.hpp"
#include "mfg/model.hpp"
#include "mfg/quadrature.hpp"
#include "mfg/state_grid.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Finite action set: points of Gamma with norm <= M, in lexicographic order.
struct ControlGrid {
  double M = 1.0;
  int k = 1;
  int dim = 1;
  double spacing = 1.0;
  std::vector<double> atoms;

  std::size_t size() const { return atoms.size() / static_cast<std::size_t>(dim); }
  std::span<const double> atom(std::size_t a) const {
    return {atoms.data() + a * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

// Lattice spacing 2^-p with p = max(ceil(2 log2 k), ceil(log2(k sqrt(dim)))),
// so it never exceeds 1/k (nor 1/(k sqrt(dim))) and halves along nested k.
double control_lattice_spacing(int k, int dim);

// Lattice points of the given spacing inside Gamma and the ball of radius M.
// For boxes the clamped projections of lattice points are added so the grid
// reaches the faces; for general closed sets, lattice points near Gamma are
// projected onto it. Falls back to {gamma0} when nothing is left.
ControlGrid build_control_grid(const ModelSpec& model, double M, int k);

struct DpOptions {
  int k = 5;            // decision slots of length T 2^-k
  int time_level = -1;  // transition slots of length T 2^-time_level; < 0 means k
  int substeps = 4;     // Euler sub-steps per transition slot
  NoiseRule rule;
  // Coefficients see (1 - w) flow(t) + w delta_x instead of flow(t); w = 1/N
  // models a single player's own contribution to a finite population.
  double self_weight = 0.0;
};

// V[j][node] for j = 0..2^k (decision times).
struct ValueGrid {
  int slices = 0;
  std::size_t nodes = 0;
  std::vector<double> values;
  std::span<const double> slice(int j) const {
    return {values.data() + static_cast<std::size_t>(j) * nodes, nodes};
  }
};

// v*[j][node] for j = 0..2^k - 1, indices into the control grid.
struct FeedbackPolicy {
  int slots = 0;
  std::size_t nodes = 0;
  std::vector<std::uint32_t> index;
  std::uint32_t at(int j, std::size_t node) const { return index[static_cast<std::size_t>(j) * nodes + node]; }
};

struct DpResult {
  ValueGrid value;
  FeedbackPolicy policy;
  StateGrid sgrid;
  ControlGrid cgrid;
  TimeGrid decision_grid;
  TimeGrid time_grid;
  int substeps = 1;
  double self_weight = 0.0;
  // Share of quadrature successor states that left the state box.
  double boundary_fraction = 0.0;

  // Slots of the transition grid per decision slot.
  int hold() const { return time_grid.slots() / decision_grid.slots(); }
  // Grid on which particles and the noise-feedback recursion move.
  TimeGrid fine_grid() const { return TimeGrid(time_grid.horizon(), time_grid.slots() * substeps); }
  double value_at(int j, std::span<const double> x) const { return sgrid.interpolate(value.slice(j), x); }
};

// One transition slot of the sub-stepped Euler scheme under a frozen flow.
// Sub-step s of slot l runs at fine time index l*S + s of fine_grid.
class SlotTransition {
 public:
  SlotTransition(const ModelSpec& model, const MeasureFlow& flow, TimeGrid time_grid, int substeps,
                 double self_weight);

  int substeps() const { return substeps_; }
  const TimeGrid& fine_grid() const { return fine_; }
  // Advances x over slot l with action gamma and sub-step noise increments
  // dw (S * d1 values); returns the running cost integrated over the slot.
  // When trace is non-empty it receives the state after each sub-step.
  double run(int slot, std::span<double> x, std::span<const double> gamma, std::span<const double> dw,
             std::span<double> trace = {}) const;
  // One Euler sub-step at the given fine index; returns f dt.
  double step(int fine_index, std::span<double> x, std::span<const double> gamma, std::span<const double> dw) const;
  double terminal(std::span<const double> x) const;
  const DiscreteMeasure& measure(int fine_index) const { return *slices_[static_cast<std::size_t>(fine_index)]; }

 private:
  const ModelSpec* model_;
  TimeGrid fine_;
  int substeps_;
  double self_weight_;
  double dt_ = 0.0;
  std::vector<double> times_;
  std::vector<const DiscreteMeasure*> slices_;
};

// Backward dynamic programming on the state grid. Each transition slot is
// integrated by the noise rule over the slot's total increment, spread
// linearly across the sub-steps; successor values are read by clamped
// multilinear interpolation. With time_level > k the action is held over
// 2^(time_level - k) transition slots. Argmin ties go to the smallest index.
DpResult backward_dp(const ModelSpec& model, const MeasureFlow& flow, const ControlGrid& cgrid,
                     const StateGrid& sgrid, const DpOptions& options);

// The noise-feedback strategy: replays the DP state recursion from xi along
// the player's own noise and plays v*(j, nearest node) at decision times.
// Noise grids must split every transition slot into an integer number of
// steps; W is read piecewise linearly at the sub-step times.
StrategyPtr noise_feedback_strategy(const ModelSpec& model, std::shared_ptr<const MeasureFlow> flow,
                                    std::shared_ptr<const DpResult> dp);

// Frozen-flow particles driven by the DP policy on dp.fine_grid().
// Particles come in antithetic pairs: particle p < P/2 uses noise stream p
// and the p-th smallest initial atom, particle P/2 + p the negated noise and
// the p-th largest atom.
struct ParticleRun {
  TimeGrid grid;
  std::size_t particles = 0;
  std::vector<double> states;      // (j*P + p)*d
  std::vector<double> controls;    // (j*P + p)*d2
  std::vector<double> increments;  // (p*J + j)*d1
  std::vector<double> costs;       // realized cost per particle
  double mean_cost = 0.0;
  double cost_se = 0.0;  // over pair means
  MeasureFlow flow;      // empirical flow of the particles
};

// Sorted initial atoms (P of them) drawn deterministically from m0: m0's own
// atoms when it already has P equal weights, stratified resampling otherwise.
std::vector<double> initial_particles(const DiscreteMeasure& m0, std::size_t count, std::uint64_t seed);

ParticleRun push_particles(const ModelSpec& model, const MeasureFlow& flow, const DpResult& dp,
                           std::span<const double> initial, std::uint64_t seed);

// Mean of V[0] over the atoms of mu.
double mean_initial_value(const DpResult& dp, const DiscreteMeasure& mu);

struct MonotonicityRow {
  int M = 1;
  std::size_t atoms = 0;
  std::vector<double> values;  // V_{M,M}(0, probe)
};

struct MonotonicityTable {
  std::vector<double> probes;  // flat, d per probe
  std::vector<MonotonicityRow> rows;
  double max_increase = 0.0;   // max over probes and consecutive rows of V_next - V_prev
  bool nonincreasing(double tol) const { return max_increase <= tol; }
};

// V_{M,M}(0, probe) for each M in the ascending list, all computed on the
// common transition grid of level max(M) so that the policy classes are
// nested and the sequence is nonincreasing up to rounding.
MonotonicityTable value_monotonicity_study(const ModelSpec& model, const MeasureFlow& flow, const StateGrid& sgrid,
                                           const std::vector<int>& M_list, std::span<const double> probes,
                                           int substeps, const NoiseRule& rule);

struct MfgParams {
  std::size_t particles = 1024;
  double damping = 0.5;
  int max_iters = 40;
  double tol = 1e-3;
  double M = 4.0;
  int k = 5;
  StateGrid sgrid = StateGrid::uniform(1, -3.0, 3.0, 201);
  int substeps = 4;
  NoiseRule rule;
  std::uint64_t seed = 0;
  // Optional first iterate (any time grid, read as a step function and
  // resampled to the particle count); m0 held constant otherwise.
  std::shared_ptr<const MeasureFlow> warm_start;
};

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;     // flow_distance(next iterate, current iterate)
  double pass_change = 0.0;  // flow_distance between consecutive particle flows
  double mean_cost = 0.0;
  double mean_value = 0.0;
  double boundary_fraction = 0.0;
};

struct MfgSolution {
  MeasureFlow flow;  // empirical particle flow of the final pass
  std::shared_ptr<const MeasureFlow> iterate;  // flow the final policy was computed against
  std::shared_ptr<const DpResult> dp;
  ParticleRun particles;
  std::vector<double> initial;  // particle initial states
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
  double optimality_gap = 0.0;  // mean particle cost - mean V[0] over m0 atoms
  double value_mean = 0.0;
  std::vector<IterationRecord> history;
};

// Damped Picard iteration on the measure flow. Flows live on the fine grid
// (2^k * S slots); the first iterate is params.warm_start or m0 held constant.
MfgSolution solve_mfg(const ModelSpec& model, const DiscreteMeasure& m0, const MfgParams& params,
                      const std::function<void(const IterationRecord&)>& on_iteration = {});

}  // namespace mfg
