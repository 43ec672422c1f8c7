#include "mfg/relaxed_controls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfg/errors.hpp"

namespace mfg {
namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

StepControl::StepControl(TimeGrid grid, int dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (dim_ < 1) throw InvalidArgument("control dimension must be >= 1");
  if (values_.size() != static_cast<std::size_t>(grid_.slots()) * static_cast<std::size_t>(dim_)) {
    throw InvalidArgument("step control needs one value per slot");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("step control values must be finite");
  }
}

StepControl StepControl::constant(TimeGrid grid, std::span<const double> gamma) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(grid.slots()) * gamma.size());
  for (int j = 0; j < grid.slots(); ++j) values.insert(values.end(), gamma.begin(), gamma.end());
  return StepControl(grid, static_cast<int>(gamma.size()), std::move(values));
}

double StepControl::energy() const {
  double s = 0.0;
  for (int j = 0; j < grid_.slots(); ++j) s += norm2(value(j));
  return s * grid_.step();
}

bool StepControl::within(const ControlSet& gamma_set) const {
  for (int j = 0; j < grid_.slots(); ++j) {
    if (!gamma_set.contains(value(j))) return false;
  }
  return true;
}

RelaxedControlPath::RelaxedControlPath(TimeGrid grid, int dim, std::vector<SlotMeasure> slots)
    : grid_(grid), dim_(dim), slots_(std::move(slots)) {
  if (dim_ < 1) throw InvalidArgument("control dimension must be >= 1");
  if (slots_.size() != static_cast<std::size_t>(grid_.slots())) {
    throw InvalidArgument("relaxed control needs one slot measure per slot");
  }
  for (const auto& s : slots_) {
    if (s.weights.empty() || s.atoms.size() != s.weights.size() * static_cast<std::size_t>(dim_)) {
      throw InvalidArgument("relaxed control slot: atoms and weights do not match");
    }
    long double total = 0.0L;
    for (double w : s.weights) {
      if (!(w >= 0.0)) throw InvalidArgument("relaxed control slot: negative weight");
      total += w;
    }
    if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12) {
      throw InvalidArgument("relaxed control slot: weights must sum to 1");
    }
  }
}

double RelaxedControlPath::mass_until(int j) const {
  long double total = 0.0L;
  for (int l = 0; l < j; ++l) {
    long double slot_mass = 0.0L;
    for (double w : slot(l).weights) slot_mass += w;
    total += slot_mass * grid_.step();
  }
  return static_cast<double>(total);
}

double RelaxedControlPath::moment(double p) const {
  long double total = 0.0L;
  for (int j = 0; j < grid_.slots(); ++j) {
    long double slot_sum = 0.0L;
    for (std::size_t a = 0; a < atom_count(j); ++a) {
      const double r2 = norm2(atom(j, a));
      const double term = p == 2.0 ? r2 : std::pow(std::sqrt(r2), p);
      slot_sum += slot(j).weights[a] * term;
    }
    total += slot_sum;
  }
  return static_cast<double>(total * grid_.step());
}

RelaxedControlPath lift(const StepControl& u) {
  std::vector<SlotMeasure> slots(static_cast<std::size_t>(u.grid().slots()));
  for (int j = 0; j < u.grid().slots(); ++j) {
    const auto v = u.value(j);
    slots[static_cast<std::size_t>(j)] = {{v.begin(), v.end()}, {1.0}};
  }
  return RelaxedControlPath(u.grid(), u.dim(), std::move(slots));
}

RelaxedControlPath truncate(const RelaxedControlPath& r, double radius, std::span<const double> gamma0,
                            const ControlSet& gamma_set) {
  if (!(radius > 0.0)) throw InvalidArgument("truncation radius must be positive");
  if (gamma0.size() != static_cast<std::size_t>(r.dim()) || !gamma_set.contains(gamma0)) {
    throw InvalidArgument("fallback action gamma0 is not in the control set");
  }
  const double r2 = radius * radius;
  // Below the threshold where the truncated set is empty, everything maps to gamma0.
  const bool collapse = norm2(gamma0) > r2;
  std::vector<SlotMeasure> slots;
  slots.reserve(static_cast<std::size_t>(r.grid().slots()));
  for (int j = 0; j < r.grid().slots(); ++j) {
    SlotMeasure out;
    double moved = 0.0;
    std::size_t gamma0_index = std::numeric_limits<std::size_t>::max();
    for (std::size_t a = 0; a < r.atom_count(j); ++a) {
      const auto g = r.atom(j, a);
      const double w = r.slot(j).weights[a];
      if (!collapse && norm2(g) <= r2) {
        if (std::equal(g.begin(), g.end(), gamma0.begin())) gamma0_index = out.weights.size();
        out.atoms.insert(out.atoms.end(), g.begin(), g.end());
        out.weights.push_back(w);
      } else {
        moved += w;
      }
    }
    if (moved > 0.0 || out.weights.empty()) {
      if (gamma0_index < out.weights.size()) {
        out.weights[gamma0_index] += moved;
      } else {
        out.atoms.insert(out.atoms.end(), gamma0.begin(), gamma0.end());
        out.weights.push_back(moved);
      }
    }
    slots.push_back(std::move(out));
  }
  return RelaxedControlPath(r.grid(), r.dim(), std::move(slots));
}

std::size_t nearest_action(std::span<const double> grid_atoms, int dim, std::span<const double> gamma) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t count = grid_atoms.size() / d;
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < count; ++a) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = grid_atoms[a * d + c] - gamma[c];
      s += diff * diff;
    }
    if (s < best_d2) {
      best_d2 = s;
      best = a;
    }
  }
  return best;
}

StepControl chattering_project(const StepControl& u, std::span<const double> grid_atoms, int level) {
  const auto d = static_cast<std::size_t>(u.dim());
  if (grid_atoms.empty() || grid_atoms.size() % d != 0) throw InvalidArgument("chattering_project: empty grid");
  if (level < 0 || level > 30) throw InvalidArgument("chattering_project: bad dyadic level");
  const int coarse = 1 << level;
  if (u.grid().slots() % coarse != 0) {
    throw InvalidArgument("chattering_project: control grid does not refine the dyadic grid");
  }
  const int ratio = u.grid().slots() / coarse;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(coarse) * d);
  for (int j = 0; j < coarse; ++j) {
    const std::size_t a = nearest_action(grid_atoms, u.dim(), u.value(j * ratio));
    values.insert(values.end(), grid_atoms.begin() + static_cast<std::ptrdiff_t>(a * d),
                  grid_atoms.begin() + static_cast<std::ptrdiff_t>((a + 1) * d));
  }
  return StepControl(TimeGrid(u.grid().horizon(), coarse), u.dim(), std::move(values));
}

double covering_radius(std::span<const double> grid_atoms, std::span<const double> samples, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples.size() / d; ++s) {
    const auto g = samples.subspan(s * d, d);
    const std::size_t a = nearest_action(grid_atoms, dim, g);
    double d2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = grid_atoms[a * d + c] - g[c];
      d2 += diff * diff;
    }
    worst = std::max(worst, std::sqrt(d2));
  }
  return worst;
}

}  // namespace mfg
