#include "mfg/control_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfg/errors.hpp"

namespace mfg {

ControlSet ControlSet::whole_space(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return box(std::vector<double>(static_cast<std::size_t>(dim), -inf),
             std::vector<double>(static_cast<std::size_t>(dim), inf));
}

ControlSet ControlSet::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() || lower.size() != upper.size()) throw InvalidArgument("control box: bad bounds");
  for (std::size_t c = 0; c < lower.size(); ++c) {
    if (!(lower[c] <= upper[c])) throw InvalidArgument("control box: lower bound exceeds upper bound");
  }
  ControlSet s;
  s.dim_ = static_cast<int>(lower.size());
  s.is_box_ = true;
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

ControlSet ControlSet::closed(int dim, Predicate contains, Projection project) {
  if (dim < 1) throw InvalidArgument("control set dimension must be >= 1");
  if (!contains || !project) throw InvalidArgument("closed control set needs a predicate and a projection");
  ControlSet s;
  s.dim_ = dim;
  s.is_box_ = false;
  s.contains_ = std::move(contains);
  s.project_ = std::move(project);
  return s;
}

bool ControlSet::bounded() const {
  if (!is_box_) return false;
  for (std::size_t c = 0; c < lower_.size(); ++c) {
    if (!std::isfinite(lower_[c]) || !std::isfinite(upper_[c])) return false;
  }
  return true;
}

bool ControlSet::contains(std::span<const double> gamma, double tol) const {
  if (gamma.size() != static_cast<std::size_t>(dim_)) return false;
  if (!is_box_) return contains_(gamma);
  for (std::size_t c = 0; c < gamma.size(); ++c) {
    if (!(gamma[c] >= lower_[c] - tol && gamma[c] <= upper_[c] + tol)) return false;
  }
  return true;
}

void ControlSet::project(std::span<const double> gamma, std::span<double> out) const {
  if (gamma.size() != static_cast<std::size_t>(dim_) || out.size() != gamma.size()) {
    throw InvalidArgument("control set projection: dimension mismatch");
  }
  if (!is_box_) {
    project_(gamma, out);
    return;
  }
  for (std::size_t c = 0; c < gamma.size(); ++c) out[c] = std::clamp(gamma[c], lower_[c], upper_[c]);
}

}  // namespace mfg
