#include "mfg/state_grid.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

StateGrid::StateGrid(std::vector<double> lower, std::vector<double> upper, std::vector<int> nodes)
    : lower_(std::move(lower)), upper_(std::move(upper)), nodes_(std::move(nodes)) {
  const std::size_t d = lower_.size();
  if (d == 0 || upper_.size() != d || nodes_.size() != d) throw InvalidArgument("state grid: bad dimensions");
  spacing_.resize(d);
  stride_.resize(d);
  total_ = 1;
  for (std::size_t c = d; c-- > 0;) {
    if (!std::isfinite(lower_[c]) || !std::isfinite(upper_[c]) || !(lower_[c] < upper_[c])) {
      throw InvalidArgument("state grid bounds must be finite with lower < upper");
    }
    if (nodes_[c] < 2) throw InvalidArgument("state grid needs at least two nodes per dimension");
    spacing_[c] = (upper_[c] - lower_[c]) / (nodes_[c] - 1);
    stride_[c] = total_;
    total_ *= static_cast<std::size_t>(nodes_[c]);
  }
}

StateGrid StateGrid::uniform(int dim, double lower, double upper, int nodes) {
  const auto d = static_cast<std::size_t>(dim);
  return StateGrid(std::vector<double>(d, lower), std::vector<double>(d, upper), std::vector<int>(d, nodes));
}

void StateGrid::node(std::size_t index, std::span<double> out) const {
  for (std::size_t c = 0; c < lower_.size(); ++c) {
    const std::size_t i = (index / stride_[c]) % static_cast<std::size_t>(nodes_[c]);
    out[c] = i + 1 == static_cast<std::size_t>(nodes_[c]) ? upper_[c] : lower_[c] + static_cast<double>(i) * spacing_[c];
  }
}

std::vector<double> StateGrid::node(std::size_t index) const {
  std::vector<double> out(lower_.size());
  node(index, out);
  return out;
}

std::size_t StateGrid::nearest(std::span<const double> x) const {
  std::size_t index = 0;
  for (std::size_t c = 0; c < lower_.size(); ++c) {
    const double u = (x[c] - lower_[c]) / spacing_[c];
    double i = std::ceil(u - 0.5);
    i = std::clamp(i, 0.0, static_cast<double>(nodes_[c] - 1));
    index += static_cast<std::size_t>(i) * stride_[c];
  }
  return index;
}

bool StateGrid::inside(std::span<const double> x) const {
  for (std::size_t c = 0; c < lower_.size(); ++c) {
    if (x[c] < lower_[c] || x[c] > upper_[c]) return false;
  }
  return true;
}

double StateGrid::interpolate(std::span<const double> values, std::span<const double> x) const {
  const std::size_t d = lower_.size();
  if (d == 1) {
    const double u = std::clamp((x[0] - lower_[0]) / spacing_[0], 0.0, static_cast<double>(nodes_[0] - 1));
    std::size_t i = static_cast<std::size_t>(u);
    if (i + 1 >= static_cast<std::size_t>(nodes_[0])) i = static_cast<std::size_t>(nodes_[0]) - 2;
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * values[i] + w * values[i + 1];
  }
  std::size_t base = 0;
  double frac[8];
  std::size_t step[8];
  if (d > 8) throw InvalidArgument("state grid interpolation supports d <= 8");
  for (std::size_t c = 0; c < d; ++c) {
    const double u = std::clamp((x[c] - lower_[c]) / spacing_[c], 0.0, static_cast<double>(nodes_[c] - 1));
    std::size_t i = static_cast<std::size_t>(u);
    if (i + 1 >= static_cast<std::size_t>(nodes_[c])) i = static_cast<std::size_t>(nodes_[c]) - 2;
    frac[c] = u - static_cast<double>(i);
    step[c] = stride_[c];
    base += i * stride_[c];
  }
  double result = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t idx = base;
    for (std::size_t c = 0; c < d; ++c) {
      if (corner >> c & 1U) {
        w *= frac[c];
        idx += step[c];
      } else {
        w *= 1.0 - frac[c];
      }
    }
    if (w != 0.0) result += w * values[idx];
  }
  return result;
}

}  // namespace mfg
