#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "mfg/measures.hpp"
#include "mfg/model.hpp"

namespace mfg::testing {

// Scalar model b = drift_const + drift_lin x, sigma = vol, f = cost_gamma gamma^2 + f_const, F = terminal_quad x^2.
struct ScalarSpec {
  double drift_const = 0.0;
  double drift_lin = 0.0;
  double vol = 0.0;
  double control_gain = 0.0;
  double cost_gamma = 0.0;
  double f_const = 0.0;
  double terminal_quad = 0.0;
  double T = 1.0;
  double K = 1.0;
  double L = 1.0;
};

inline ModelSpec scalar_model(const ScalarSpec& s) {
  ModelSpec m;
  m.name = "scalar";
  m.T = s.T;
  m.K = s.K;
  m.L = s.L;
  m.c0 = s.cost_gamma > 0.0 ? s.cost_gamma : 1.0;
  m.drift = [s](double, std::span<const double> x, const MeasureView&, std::span<const double> g,
                std::span<double> out) { out[0] = s.drift_const + s.drift_lin * x[0] + s.control_gain * g[0]; };
  m.diffusion = [s](double, std::span<const double>, const MeasureView&, std::span<double> out) { out[0] = s.vol; };
  m.running_cost = [s](double, std::span<const double>, const MeasureView&, std::span<const double> g) {
    return s.cost_gamma * g[0] * g[0] + s.f_const;
  };
  m.terminal_cost = [s](std::span<const double> x, const MeasureView&) { return s.terminal_quad * x[0] * x[0]; };
  if (s.cost_gamma == 0.0) m.gamma_set = ControlSet::box({-1.0}, {1.0});
  return m;
}

inline std::vector<double> random_points(std::mt19937_64& gen, std::size_t n, int d, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> p(n * static_cast<std::size_t>(d));
  for (double& v : p) v = z(gen);
  return p;
}

// min over all permutations of (1/n) sum |x_i - y_sigma(i)|^2.
inline double permutation_oracle(std::span<const double> x, std::span<const double> y, std::size_t n, int d) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) {
        const double diff = x[i * d + k] - y[perm[i] * d + k];
        c += diff * diff;
      }
    }
    best = std::min(best, c / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace mfg::testing
