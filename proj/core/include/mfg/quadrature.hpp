#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mfg {

// How the DP integrates over one slot's Gaussian noise increment.
struct NoiseRule {
  enum class Kind { kGaussHermite, kMonteCarlo };
  Kind kind = Kind::kGaussHermite;
  int nodes = 7;     // Gauss-Hermite nodes per noise dimension
  int samples = 64;  // Monte Carlo draws
  std::uint64_t seed = 0;

  // Gauss-Hermite with 7 nodes when d1 <= 2, otherwise 64 Monte Carlo draws.
  static NoiseRule default_for(int d1);
};

// Points for E[g(Z)], Z ~ N(0, I_dim): weights are positive and sum to one.
struct Quadrature {
  int dim = 1;
  std::vector<double> points;  // flat, row-major
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

// n-node Gauss-Hermite rule for the standard normal weight (Golub-Welsch).
Quadrature gauss_hermite(int n);
Quadrature build_quadrature(const NoiseRule& rule, int dim);

}  // namespace mfg
