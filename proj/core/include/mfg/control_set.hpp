#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mfg {

// The action space Gamma, a closed subset of R^{d2}. Either an axis-aligned
// box (bounds may be infinite, so R^{d2} itself is a box) or a general closed
// set given by a membership predicate and a nearest-point projection.
class ControlSet {
 public:
  using Predicate = std::function<bool(std::span<const double>)>;
  using Projection = std::function<void(std::span<const double>, std::span<double>)>;

  static ControlSet whole_space(int dim);
  static ControlSet box(std::vector<double> lower, std::vector<double> upper);
  static ControlSet closed(int dim, Predicate contains, Projection project);

  int dim() const { return dim_; }
  bool is_box() const { return is_box_; }
  bool bounded() const;
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }

  bool contains(std::span<const double> gamma, double tol = 1e-12) const;
  // Nearest point of the set (clamping for boxes).
  void project(std::span<const double> gamma, std::span<double> out) const;

 private:
  int dim_ = 1;
  bool is_box_ = true;
  std::vector<double> lower_;
  std::vector<double> upper_;
  Predicate contains_;
  Projection project_;
};

}  // namespace mfg
