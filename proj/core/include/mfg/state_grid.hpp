#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfg {

// Tensor grid of equispaced nodes on a box in R^d. Node indices are
// row-major with the last coordinate varying fastest. Values outside the box
// are read by clamping to it.
class StateGrid {
 public:
  StateGrid() = default;
  StateGrid(std::vector<double> lower, std::vector<double> upper, std::vector<int> nodes);
  static StateGrid uniform(int dim, double lower, double upper, int nodes);

  int dim() const { return static_cast<int>(lower_.size()); }
  std::size_t size() const { return total_; }
  int nodes(int c) const { return nodes_[static_cast<std::size_t>(c)]; }
  double lower(int c) const { return lower_[static_cast<std::size_t>(c)]; }
  double upper(int c) const { return upper_[static_cast<std::size_t>(c)]; }
  double spacing(int c) const { return spacing_[static_cast<std::size_t>(c)]; }

  void node(std::size_t index, std::span<double> out) const;
  std::vector<double> node(std::size_t index) const;
  // Nearest node, ties toward the lower index in every coordinate.
  std::size_t nearest(std::span<const double> x) const;
  bool inside(std::span<const double> x) const;

  // Multilinear interpolation of node values at x, clamped to the box.
  double interpolate(std::span<const double> values, std::span<const double> x) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> nodes_;
  std::vector<double> spacing_;
  std::vector<std::size_t> stride_;
  std::size_t total_ = 0;
};

}  // namespace mfg
