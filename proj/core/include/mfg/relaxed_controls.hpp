#pragma once

#include <span>
#include <vector>

#include "mfg/control_set.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Ordinary control, piecewise constant on a uniform grid: value(j) is used on
// [t_j, t_{j+1}).
class StepControl {
 public:
  StepControl() = default;
  StepControl(TimeGrid grid, int dim, std::vector<double> values);
  static StepControl constant(TimeGrid grid, std::span<const double> gamma);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::span<const double> value(int slot) const {
    return {values_.data() + static_cast<std::size_t>(slot) * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> values() const { return values_; }

  // sum_j |gamma_j|^2 dt
  double energy() const;
  // Every slot value lies in the set.
  bool within(const ControlSet& gamma_set) const;

 private:
  TimeGrid grid_;
  int dim_ = 1;
  std::vector<double> values_;
};

// One slot of a relaxed control: a probability measure on finitely many
// actions (atoms flat, row-major).
struct SlotMeasure {
  std::vector<double> atoms;
  std::vector<double> weights;
};

// Relaxed control with slot-wise constant derivative measure: over
// [t_j, t_{j+1}) it is slot(j)(d gamma) dt, so the mass of Gamma x [0, t_j]
// equals t_j.
class RelaxedControlPath {
 public:
  RelaxedControlPath() = default;
  RelaxedControlPath(TimeGrid grid, int dim, std::vector<SlotMeasure> slots);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  const SlotMeasure& slot(int j) const { return slots_[static_cast<std::size_t>(j)]; }
  std::size_t atom_count(int j) const { return slot(j).weights.size(); }
  std::span<const double> atom(int j, std::size_t a) const {
    return {slot(j).atoms.data() + a * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

  // r(Gamma x [0, t_j]).
  double mass_until(int j) const;
  // int |gamma|^p r(d gamma, dt).
  double moment(double p) const;
  double second_moment() const { return moment(2.0); }

 private:
  TimeGrid grid_;
  int dim_ = 1;
  std::vector<SlotMeasure> slots_;
};

RelaxedControlPath lift(const StepControl& u);

// Keep mass on {|gamma| <= radius}; move the rest onto gamma0.
RelaxedControlPath truncate(const RelaxedControlPath& r, double radius, std::span<const double> gamma0,
                            const ControlSet& gamma_set);

// Snap every value to its nearest grid action (ties to the lowest index) and
// resample onto the dyadic grid with 2^level slots using left endpoints.
StepControl chattering_project(const StepControl& u, std::span<const double> grid_atoms, int level);

// max over the sample points of the distance to the nearest grid action.
double covering_radius(std::span<const double> grid_atoms, std::span<const double> samples, int dim);

std::size_t nearest_action(std::span<const double> grid_atoms, int dim, std::span<const double> gamma);

}  // namespace mfg
