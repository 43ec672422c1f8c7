#pragma once

#include <cstddef>

#include "mfg/errors.hpp"

namespace mfg {

// Uniform grid 0 = t_0 < ... < t_J = horizon with step horizon / J.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, int slots) : horizon_(horizon), slots_(slots) {
    if (!(horizon > 0.0)) throw InvalidArgument("time horizon must be positive");
    if (slots < 1) throw InvalidArgument("time grid needs at least one slot");
  }

  double horizon() const { return horizon_; }
  int slots() const { return slots_; }
  std::size_t points() const { return static_cast<std::size_t>(slots_) + 1; }
  double step() const { return horizon_ / slots_; }
  double time(int j) const { return j == slots_ ? horizon_ : horizon_ * j / slots_; }

  // True when every point of `coarse` is a point of this grid.
  bool refines(const TimeGrid& coarse) const {
    return horizon_ == coarse.horizon_ && slots_ % coarse.slots_ == 0;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_ = 1.0;
  int slots_ = 1;
};

}  // namespace mfg
