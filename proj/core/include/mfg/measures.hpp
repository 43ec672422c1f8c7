#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfg/time_grid.hpp"

namespace mfg {

// Finitely supported probability measure on R^d. Atoms are stored flat,
// row-major (atom i occupies coords[i*d, (i+1)*d)). Duplicate atoms are kept.
// Immutable after construction; mean and second moment are cached.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(int dim, std::vector<double> coords, std::vector<double> weights);

  static DiscreteMeasure dirac(std::span<const double> point);
  static DiscreteMeasure uniform(int dim, std::vector<double> coords);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  std::span<const double> atom(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> coords() const { return coords_; }
  std::span<const double> weights() const { return weights_; }

  std::span<const double> mean() const { return mean_; }
  double second_moment() const { return second_moment_; }
  // All weights bitwise equal.
  bool has_uniform_weights() const { return uniform_; }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::vector<double> mean_;
  double second_moment_ = 0.0;
  bool uniform_ = false;
};

// Read-only argument handed to model coefficients: either a measure, or the
// mixture (1 - w) * base + w * delta_x used when one agent's own state is
// part of the population it interacts with.
class MeasureView {
 public:
  MeasureView(const DiscreteMeasure& base)  // NOLINT(google-explicit-constructor)
      : base_(&base) {}
  MeasureView(const DiscreteMeasure& base, std::span<const double> extra_atom,
              double extra_weight);

  int dim() const { return base_->dim(); }
  std::size_t size() const { return base_->size() + (extra_weight_ > 0.0 ? 1 : 0); }
  std::span<const double> atom(std::size_t i) const {
    return i < base_->size() ? base_->atom(i) : extra_atom_;
  }
  double weight(std::size_t i) const {
    return i < base_->size() ? (1.0 - extra_weight_) * base_->weight(i) : extra_weight_;
  }
  double mean(int coord) const {
    const double m = base_->mean()[static_cast<std::size_t>(coord)];
    return extra_weight_ > 0.0 ? (1.0 - extra_weight_) * m + extra_weight_ * extra_atom_[coord] : m;
  }
  double second_moment() const;

 private:
  const DiscreteMeasure* base_;
  std::span<const double> extra_atom_;
  double extra_weight_ = 0.0;
};

// Uniform weights 1/N on the given points (flat, N*dim values).
DiscreteMeasure empirical_measure(int dim, std::span<const double> points);
DiscreteMeasure empirical_measure(const std::vector<std::vector<double>>& points);

double second_moment(const DiscreteMeasure& mu);

struct TransportPlan {
  struct Entry {
    std::size_t source;
    std::size_t target;
    double mass;
  };
  std::vector<Entry> entries;
  // Sum of mass * |x_source - x_target|^2.
  double cost = 0.0;
};

struct Wasserstein2 {
  double distance = 0.0;
  TransportPlan plan;
};

// Exact squared-cost optimal transport. d = 1 uses the monotone (quantile)
// coupling; d > 1 with equal-size uniform supports uses an assignment solver;
// everything else uses an exact min-cost-flow transportation solver.
Wasserstein2 wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
// Same value without materializing the plan.
double wasserstein2_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Exact solvers exposed for cross-checks. Costs are row-major n x m.
TransportPlan monotone_plan_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);
TransportPlan solve_transport(std::span<const double> cost, std::span<const double> supply,
                              std::span<const double> demand);
std::vector<double> squared_distance_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Time-indexed family of measures sharing one dimension.
class MeasureFlow {
 public:
  MeasureFlow() = default;
  MeasureFlow(std::vector<double> times, std::vector<DiscreteMeasure> measures);
  MeasureFlow(const TimeGrid& grid, std::vector<DiscreteMeasure> measures);
  static MeasureFlow constant(const TimeGrid& grid, const DiscreteMeasure& mu);

  std::size_t size() const { return measures_.size(); }
  int dim() const { return measures_.empty() ? 0 : measures_.front().dim(); }
  std::span<const double> times() const { return times_; }
  const DiscreteMeasure& at(std::size_t j) const { return measures_[j]; }
  const std::vector<DiscreteMeasure>& measures() const { return measures_; }
  double horizon() const { return times_.back(); }

  // Index of the last grid time <= t (flows are read as right-continuous
  // step functions between grid points).
  std::size_t index_at(double t) const;
  const DiscreteMeasure& at_time(double t) const { return measures_[index_at(t)]; }

 private:
  std::vector<double> times_;
  std::vector<DiscreteMeasure> measures_;
};

// max over grid points of wasserstein2 between the two flows (a grid proxy
// for the sup over [0, T]).
double flow_distance(const MeasureFlow& a, const MeasureFlow& b);

// Deterministic thinning of a weighted measure to `count` equal-weight atoms
// by stratified resampling over lexicographically sorted atoms.
DiscreteMeasure stratified_resample(const DiscreteMeasure& mu, std::size_t count,
                                    std::uint64_t seed, std::uint64_t stream);

// (1 - lambda) * a + lambda * b as concatenated atoms with scaled weights.
DiscreteMeasure mixture(const DiscreteMeasure& a, const DiscreteMeasure& b, double lambda);

}  // namespace mfg
