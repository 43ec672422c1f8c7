#include "mfg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

DiscreteMeasure::DiscreteMeasure(int dim, std::vector<double> coords, std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ < 1) throw InvalidArgument("measure dimension must be >= 1");
  if (weights_.empty()) throw InvalidArgument("empty sample");
  if (coords_.size() != weights_.size() * static_cast<std::size_t>(dim_)) {
    throw InvalidArgument("measure support and weights differ in length");
  }
  long double total = 0.0L;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("measure weights must be finite and >= 0");
    total += w;
  }
  if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12) {
    throw InvalidArgument("measure weights sum to " + std::to_string(static_cast<double>(total)) +
                          ", expected 1");
  }
  for (double x : coords_) {
    if (!std::isfinite(x)) throw InvalidArgument("measure atoms must be finite");
  }
  mean_.assign(static_cast<std::size_t>(dim_), 0.0);
  std::vector<long double> mean_acc(static_cast<std::size_t>(dim_), 0.0L);
  long double m2 = 0.0L;
  uniform_ = true;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (w != weights_[0]) uniform_ = false;
    long double sq = 0.0L;
    for (int c = 0; c < dim_; ++c) {
      const double x = coords_[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(c)];
      mean_acc[static_cast<std::size_t>(c)] += static_cast<long double>(w) * x;
      sq += static_cast<long double>(x) * x;
    }
    m2 += w * sq;
  }
  for (int c = 0; c < dim_; ++c) mean_[static_cast<std::size_t>(c)] = static_cast<double>(mean_acc[static_cast<std::size_t>(c)]);
  second_moment_ = static_cast<double>(m2);
}

DiscreteMeasure DiscreteMeasure::dirac(std::span<const double> point) {
  return DiscreteMeasure(static_cast<int>(point.size()), {point.begin(), point.end()}, {1.0});
}

DiscreteMeasure DiscreteMeasure::uniform(int dim, std::vector<double> coords) {
  if (dim < 1) throw InvalidArgument("measure dimension must be >= 1");
  if (coords.empty()) throw InvalidArgument("empty sample");
  if (coords.size() % static_cast<std::size_t>(dim) != 0) {
    throw InvalidArgument("points are not of uniform dimension");
  }
  const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
  return DiscreteMeasure(dim, std::move(coords), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

MeasureView::MeasureView(const DiscreteMeasure& base, std::span<const double> extra_atom,
                         double extra_weight)
    : base_(&base), extra_atom_(extra_atom), extra_weight_(extra_weight) {
  if (!(extra_weight >= 0.0 && extra_weight <= 1.0)) {
    throw InvalidArgument("mixture weight must lie in [0, 1]");
  }
  if (extra_weight > 0.0 && extra_atom.size() != static_cast<std::size_t>(base.dim())) {
    throw InvalidArgument("extra atom has wrong dimension");
  }
}

double MeasureView::second_moment() const {
  if (extra_weight_ <= 0.0) return base_->second_moment();
  double sq = 0.0;
  for (double x : extra_atom_) sq += x * x;
  return (1.0 - extra_weight_) * base_->second_moment() + extra_weight_ * sq;
}

DiscreteMeasure empirical_measure(int dim, std::span<const double> points) {
  return DiscreteMeasure::uniform(dim, {points.begin(), points.end()});
}

DiscreteMeasure empirical_measure(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw InvalidArgument("empty sample");
  const std::size_t dim = points.front().size();
  std::vector<double> flat;
  flat.reserve(points.size() * dim);
  for (const auto& p : points) {
    if (p.size() != dim) throw InvalidArgument("points are not of uniform dimension");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return DiscreteMeasure::uniform(static_cast<int>(dim), std::move(flat));
}

double second_moment(const DiscreteMeasure& mu) { return mu.second_moment(); }

MeasureFlow::MeasureFlow(std::vector<double> times, std::vector<DiscreteMeasure> measures)
    : times_(std::move(times)), measures_(std::move(measures)) {
  if (times_.empty()) throw InvalidArgument("measure flow needs at least one time point");
  if (times_.size() != measures_.size()) {
    throw InvalidArgument("measure flow: time grid and measure list differ in length");
  }
  for (std::size_t j = 1; j < times_.size(); ++j) {
    if (!(times_[j] > times_[j - 1])) throw InvalidArgument("measure flow: times must increase strictly");
  }
  for (const auto& m : measures_) {
    if (m.dim() != measures_.front().dim()) throw InvalidArgument("measure flow: mixed dimensions");
  }
}

MeasureFlow::MeasureFlow(const TimeGrid& grid, std::vector<DiscreteMeasure> measures)
    : MeasureFlow(
          [&] {
            std::vector<double> t(grid.points());
            for (std::size_t j = 0; j < t.size(); ++j) t[j] = grid.time(static_cast<int>(j));
            return t;
          }(),
          std::move(measures)) {}

MeasureFlow MeasureFlow::constant(const TimeGrid& grid, const DiscreteMeasure& mu) {
  return MeasureFlow(grid, std::vector<DiscreteMeasure>(grid.points(), mu));
}

std::size_t MeasureFlow::index_at(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::fabs(times_.back()));
  const auto it = std::upper_bound(times_.begin(), times_.end(), t + tol);
  if (it == times_.begin()) return 0;
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double flow_distance(const MeasureFlow& a, const MeasureFlow& b) {
  if (a.size() != b.size()) throw InvalidArgument("flow_distance: time grids differ");
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double ta = a.times()[j];
    if (std::fabs(ta - b.times()[j]) > 1e-12 * std::max(1.0, std::fabs(ta))) {
      throw InvalidArgument("flow_distance: time grids differ");
    }
  }
  std::vector<double> per_slice(a.size(), 0.0);
  parallel_for(a.size(), [&](std::size_t j) { per_slice[j] = wasserstein2_distance(a.at(j), b.at(j)); });
  return *std::max_element(per_slice.begin(), per_slice.end());
}

DiscreteMeasure mixture(const DiscreteMeasure& a, const DiscreteMeasure& b, double lambda) {
  if (a.dim() != b.dim()) throw InvalidArgument("mixture: dimension mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("mixture weight must lie in [0, 1]");
  std::vector<double> coords(a.coords().begin(), a.coords().end());
  coords.insert(coords.end(), b.coords().begin(), b.coords().end());
  std::vector<double> weights;
  weights.reserve(a.size() + b.size());
  for (double w : a.weights()) weights.push_back((1.0 - lambda) * w);
  for (double w : b.weights()) weights.push_back(lambda * w);
  return DiscreteMeasure(a.dim(), std::move(coords), std::move(weights));
}

DiscreteMeasure stratified_resample(const DiscreteMeasure& mu, std::size_t count, std::uint64_t seed,
                                    std::uint64_t stream) {
  if (count == 0) throw InvalidArgument("stratified_resample: count must be positive");
  const std::size_t n = mu.size();
  const auto d = static_cast<std::size_t>(mu.dim());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto xi = mu.atom(i);
    const auto xj = mu.atom(j);
    return std::lexicographical_compare(xi.begin(), xi.end(), xj.begin(), xj.end());
  });
  const rng::Substream u(seed, rng::Purpose::kThinning, stream);
  std::vector<double> coords;
  coords.reserve(count * d);
  long double cumulative = mu.weight(order[0]);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const long double target = (static_cast<long double>(i) + u.uniform(i)) / static_cast<long double>(count);
    while (cumulative < target && pos + 1 < n) {
      ++pos;
      cumulative += mu.weight(order[pos]);
    }
    const auto x = mu.atom(order[pos]);
    coords.insert(coords.end(), x.begin(), x.end());
  }
  return DiscreteMeasure::uniform(mu.dim(), std::move(coords));
}

}  // namespace mfg
