#include "mfg/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/rng.hpp"

namespace mfg {

NoiseRule NoiseRule::default_for(int d1) {
  NoiseRule rule;
  if (d1 > 2) rule.kind = NoiseRule::Kind::kMonteCarlo;
  return rule;
}

Quadrature gauss_hermite(int n) {
  if (n < 1 || n > 64) throw InvalidArgument("Gauss-Hermite node count must be in [1, 64]");
  // Jacobi matrix of the monic probabilists' Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    jacobi(i, i - 1) = std::sqrt(static_cast<double>(i));
    jacobi(i - 1, i) = jacobi(i, i - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) throw NumericError("Gauss-Hermite eigen solve failed");
  Quadrature q;
  q.dim = 1;
  q.points.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    q.points[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v = solver.eigenvectors()(0, i);
    q.weights[static_cast<std::size_t>(i)] = v * v;
  }
  // Enforce exact symmetry about zero.
  for (int i = 0; i < n / 2; ++i) {
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (q.points[hi] - q.points[lo]);
    const double w = 0.5 * (q.weights[hi] + q.weights[lo]);
    q.points[lo] = -x;
    q.points[hi] = x;
    q.weights[lo] = w;
    q.weights[hi] = w;
  }
  if (n % 2 == 1) q.points[static_cast<std::size_t>(n / 2)] = 0.0;
  double total = 0.0;
  for (double w : q.weights) total += w;
  for (double& w : q.weights) w /= total;
  return q;
}

Quadrature build_quadrature(const NoiseRule& rule, int dim) {
  if (dim < 1) throw InvalidArgument("quadrature dimension must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  Quadrature q;
  q.dim = dim;
  if (rule.kind == NoiseRule::Kind::kMonteCarlo) {
    if (rule.samples < 1) throw InvalidArgument("Monte Carlo quadrature needs at least one sample");
    const auto n = static_cast<std::size_t>(rule.samples);
    const rng::Substream stream(rule.seed, rng::Purpose::kQuadrature, 0);
    q.points.resize(n * d);
    for (std::size_t i = 0; i < n * d; ++i) q.points[i] = stream.normal(i);
    q.weights.assign(n, 1.0 / static_cast<double>(n));
    return q;
  }
  const Quadrature one = gauss_hermite(rule.nodes);
  const std::size_t m = one.size();
  std::size_t total = 1;
  for (std::size_t c = 0; c < d; ++c) total *= m;
  q.points.resize(total * d);
  q.weights.resize(total);
  // Tensor product; the last coordinate varies fastest.
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    double w = 1.0;
    for (std::size_t c = d; c-- > 0;) {
      const std::size_t idx = rest % m;
      rest /= m;
      q.points[i * d + c] = one.points[idx];
      w *= one.weights[idx];
    }
    q.weights[i] = w;
  }
  return q;
}

}  // namespace mfg
