#pragma once

#include <cstddef>
#include <vector>

#include "mfg/measures.hpp"
#include "mfg/model.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Scalar linear-quadratic game:
//   b = a x + abar mean(nu) + c gamma,  sigma = s,
//   f = gamma^2 / 2 + q (x - kappa mean(nu))^2 / 2,
//   F = qT (x - kappaT mean(nu))^2 / 2,
// with Gaussian initial law N(m0_mean, m0_var).
struct LqParams {
  double a = -0.2;
  double abar = 0.3;
  double c = 1.0;
  double s = 0.4;
  double q = 1.0;
  double kappa = 0.6;
  double qT = 1.0;
  double kappaT = 0.6;
  double m0_mean = 0.5;
  double m0_var = 0.04;
  double T = 1.0;

  void validate() const;
  bool coupled() const { return abar != 0.0 || kappa != 0.0 || kappaT != 0.0; }
};

// Gamma = R, gamma0 = 0, c0 = 1/4, r0 = 1,
// K = max(|a|, |abar|, |c|, s, 1/2, q, q kappa^2, qT, qT kappaT^2),
// L = max(|a|, |abar|, q (1 v kappa)^2 / 2 + qT (1 v kappaT)^2 / 2).
ModelSpec lq_model(const LqParams& p);

// Mean-field equilibrium of the LQ game from Riccati-type ODEs.
// V(t, x) = P x^2 + Q x + R, optimal gamma = gain x + offset with
// gain = -2 c P and offset = -c Q; mean and variance of the equilibrium state.
struct LqOracle {
  LqParams params;
  TimeGrid grid;
  std::vector<double> P, Q, R, mean, variance;
  std::vector<double> dP, dQ, dR, dmean, dvariance;  // time derivatives at the nodes
  int sweeps = 0;

  double P_at(double t) const;
  double Q_at(double t) const;
  double R_at(double t) const;
  double mean_at(double t) const;
  double variance_at(double t) const;
  double gain_at(double t) const { return -2.0 * params.c * P_at(t); }
  double offset_at(double t) const { return -params.c * Q_at(t); }
  double value(double t, double x) const { return (P_at(t) * x + Q_at(t)) * x + R_at(t); }
  // E V(0, xi) for xi ~ N(m0_mean, m0_var).
  double expected_cost() const;
};

// RK4 with Hermite-cubic interpolation of the coupled coefficients, damped
// (0.5) fixed-point sweeps on the mean until sup |change| <= 1e-10; throws
// NumericError after 500 sweeps. Uncoupled problems take a single sweep.
LqOracle lq_oracle(const LqParams& p, int ode_steps);

// Atoms mean + sd * Phi^{-1}((i - 1/2) / n), i = 1..n, symmetric about mean.
DiscreteMeasure gaussian_quantile_measure(double mean, double sd, std::size_t n);
DiscreteMeasure lq_initial_measure(const LqParams& p, std::size_t n);
// Gaussian quantile clouds with the oracle mean and variance at every grid time.
MeasureFlow lq_oracle_flow(const LqOracle& oracle, const TimeGrid& grid, std::size_t atoms);

// d = d1 = d2 = 1, Gamma = [-1, 1], b = gamma, sigma = 1,
// f = gamma^2 + min(x^2, 1) + min(m2, 1), F = min(x^2, 1); K = 2, L = 2, c0 = 1.
ModelSpec bounded_model();
// Uniform on [-1, 1] as n quantile atoms.
DiscreteMeasure bounded_initial_measure(std::size_t n);

// Ornstein-Uhlenbeck: b = -x, sigma = 1, f = gamma^2 / 2, F = 0; K = L = 1.
ModelSpec ou_model();

}  // namespace mfg
