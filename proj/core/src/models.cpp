#include "mfg/models.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <functional>

#include "mfg/errors.hpp"

namespace mfg {
namespace {

// Cubic Hermite interpolation on a uniform grid from node values and slopes.
double hermite(const TimeGrid& grid, const std::vector<double>& y, const std::vector<double>& dy, double t) {
  const double h = grid.step();
  const double u = std::clamp(t / h, 0.0, static_cast<double>(grid.slots()));
  auto j = static_cast<std::size_t>(u);
  if (j >= static_cast<std::size_t>(grid.slots())) j = static_cast<std::size_t>(grid.slots()) - 1;
  const double s = u - static_cast<double>(j);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y[j] + h10 * h * dy[j] + h01 * y[j + 1] + h11 * h * dy[j + 1];
}

using Rhs = std::function<double(double t, double y)>;

// RK4 over the grid, forward from y[0] or backward from y[n]; fills slopes.
void rk4(const TimeGrid& grid, bool backward, const Rhs& f, std::vector<double>& y, std::vector<double>& dy) {
  const int n = grid.slots();
  const double h = grid.step();
  if (backward) {
    for (int j = n; j > 0; --j) {
      const double t = grid.time(j);
      const double yj = y[static_cast<std::size_t>(j)];
      const double k1 = f(t, yj);
      const double k2 = f(t - h / 2, yj - h / 2 * k1);
      const double k3 = f(t - h / 2, yj - h / 2 * k2);
      const double k4 = f(t - h, yj - h * k3);
      y[static_cast<std::size_t>(j) - 1] = yj - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double t = grid.time(j);
      const double yj = y[static_cast<std::size_t>(j)];
      const double k1 = f(t, yj);
      const double k2 = f(t + h / 2, yj + h / 2 * k1);
      const double k3 = f(t + h / 2, yj + h / 2 * k2);
      const double k4 = f(t + h, yj + h * k3);
      y[static_cast<std::size_t>(j) + 1] = yj + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  for (int j = 0; j <= n; ++j) dy[static_cast<std::size_t>(j)] = f(grid.time(j), y[static_cast<std::size_t>(j)]);
}

}  // namespace

void LqParams::validate() const {
  for (double v : {a, abar, c, s, q, kappa, qT, kappaT, m0_mean, m0_var, T}) {
    if (!std::isfinite(v)) throw InvalidArgument("LQ parameters must be finite");
  }
  if (q < 0.0 || qT < 0.0) throw InvalidArgument("LQ cost weights q, qT must be >= 0");
  if (s < 0.0) throw InvalidArgument("LQ diffusion s must be >= 0");
  if (m0_var < 0.0) throw InvalidArgument("LQ initial variance must be >= 0");
  if (!(T > 0.0)) throw InvalidArgument("LQ horizon must be positive");
}

ModelSpec lq_model(const LqParams& p) {
  p.validate();
  ModelSpec m;
  m.name = "lq";
  m.d = m.d1 = m.d2 = 1;
  m.T = p.T;
  m.drift = [p](double, std::span<const double> x, const MeasureView& nu, std::span<const double> g,
                std::span<double> out) { out[0] = p.a * x[0] + p.abar * nu.mean(0) + p.c * g[0]; };
  m.diffusion = [p](double, std::span<const double>, const MeasureView&, std::span<double> out) { out[0] = p.s; };
  m.running_cost = [p](double, std::span<const double> x, const MeasureView& nu, std::span<const double> g) {
    const double e = x[0] - p.kappa * nu.mean(0);
    return 0.5 * g[0] * g[0] + 0.5 * p.q * e * e;
  };
  m.terminal_cost = [p](std::span<const double> x, const MeasureView& nu) {
    const double e = x[0] - p.kappaT * nu.mean(0);
    return 0.5 * p.qT * e * e;
  };
  m.K = std::max({std::fabs(p.a), std::fabs(p.abar), std::fabs(p.c), p.s, 0.5, p.q, p.q * p.kappa * p.kappa, p.qT,
                  p.qT * p.kappaT * p.kappaT});
  const double k1 = std::max(1.0, std::fabs(p.kappa));
  const double kT = std::max(1.0, std::fabs(p.kappaT));
  m.L = std::max({std::fabs(p.a), std::fabs(p.abar), 0.5 * p.q * k1 * k1 + 0.5 * p.qT * kT * kT});
  if (!(m.L > 0.0)) m.L = 1e-12;
  m.c0 = 0.25;
  m.r0 = 1.0;
  m.gamma_set = ControlSet::whole_space(1);
  m.gamma0 = {0.0};
  m.delta0 = std::min(0.5, p.T);
  return m;
}

double LqOracle::P_at(double t) const { return hermite(grid, P, dP, t); }
double LqOracle::Q_at(double t) const { return hermite(grid, Q, dQ, t); }
double LqOracle::R_at(double t) const { return hermite(grid, R, dR, t); }
double LqOracle::mean_at(double t) const { return hermite(grid, mean, dmean, t); }
double LqOracle::variance_at(double t) const { return hermite(grid, variance, dvariance, t); }

double LqOracle::expected_cost() const {
  const double m = params.m0_mean;
  return P[0] * (m * m + params.m0_var) + Q[0] * m + R[0];
}

LqOracle lq_oracle(const LqParams& p, int ode_steps) {
  p.validate();
  if (ode_steps < 1000) throw InvalidArgument("lq_oracle needs at least 1000 ODE steps");
  LqOracle o;
  o.params = p;
  o.grid = TimeGrid(p.T, ode_steps);
  const auto n = static_cast<std::size_t>(ode_steps) + 1;
  const double c2 = p.c * p.c;
  o.P.assign(n, 0.0);
  o.dP.assign(n, 0.0);
  o.P[n - 1] = 0.5 * p.qT;
  rk4(o.grid, true, [&](double, double P) { return -(2 * p.a * P - 2 * c2 * P * P + 0.5 * p.q); }, o.P, o.dP);

  std::vector<double> z(n, p.m0_mean);
  std::vector<double> dz(n, 0.0);
  o.Q.assign(n, 0.0);
  o.dQ.assign(n, 0.0);
  o.R.assign(n, 0.0);
  o.dR.assign(n, 0.0);
  std::vector<double> znew(n);
  std::vector<double> dznew(n);

  auto backward = [&] {
    const auto Pt = [&](double t) { return hermite(o.grid, o.P, o.dP, t); };
    const auto zt = [&](double t) { return hermite(o.grid, z, dz, t); };
    o.Q[n - 1] = -p.qT * p.kappaT * z[n - 1];
    rk4(o.grid, true,
        [&](double t, double Q) {
          const double P = Pt(t);
          const double m = zt(t);
          return -(p.a * Q + 2 * P * p.abar * m - 2 * c2 * P * Q - p.q * p.kappa * m);
        },
        o.Q, o.dQ);
    o.R[n - 1] = 0.5 * p.qT * p.kappaT * p.kappaT * z[n - 1] * z[n - 1];
    rk4(o.grid, true,
        [&](double t, double) {
          const double Q = hermite(o.grid, o.Q, o.dQ, t);
          const double m = zt(t);
          return -(p.abar * m * Q - 0.5 * c2 * Q * Q + 0.5 * p.q * p.kappa * p.kappa * m * m + p.s * p.s * Pt(t));
        },
        o.R, o.dR);
  };
  auto forward = [&] {
    znew[0] = p.m0_mean;
    rk4(o.grid, false,
        [&](double t, double m) {
          const double P = hermite(o.grid, o.P, o.dP, t);
          const double Q = hermite(o.grid, o.Q, o.dQ, t);
          return (p.a + p.abar - 2 * c2 * P) * m - c2 * Q;
        },
        znew, dznew);
  };

  const int max_sweeps = 500;
  for (int sweep = 1;; ++sweep) {
    backward();
    forward();
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) change = std::max(change, std::fabs(znew[j] - z[j]));
    o.sweeps = sweep;
    if (!p.coupled() || change <= 1e-10) {
      z = znew;
      dz = dznew;
      if (p.coupled()) backward();
      break;
    }
    if (sweep >= max_sweeps) throw NumericError("LQ oracle fixed point not reached in 500 sweeps");
    for (std::size_t j = 0; j < n; ++j) {
      z[j] = 0.5 * z[j] + 0.5 * znew[j];
      dz[j] = 0.5 * dz[j] + 0.5 * dznew[j];
    }
  }
  o.mean = z;
  o.dmean = dz;
  o.variance.assign(n, 0.0);
  o.dvariance.assign(n, 0.0);
  o.variance[0] = p.m0_var;
  rk4(o.grid, false,
      [&](double t, double v) { return 2 * (p.a - 2 * c2 * hermite(o.grid, o.P, o.dP, t)) * v + p.s * p.s; },
      o.variance, o.dvariance);
  return o;
}

DiscreteMeasure gaussian_quantile_measure(double mean, double sd, std::size_t n) {
  if (n == 0) throw InvalidArgument("empty sample");
  if (!(sd >= 0.0)) throw InvalidArgument("standard deviation must be >= 0");
  const boost::math::normal_distribution<double> normal;
  std::vector<double> atoms(n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double z = boost::math::quantile(normal, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    atoms[i] = mean + sd * z;
    atoms[n - 1 - i] = mean - sd * z;
  }
  if (n % 2 == 1) atoms[n / 2] = mean;
  return empirical_measure(1, atoms);
}

DiscreteMeasure lq_initial_measure(const LqParams& p, std::size_t n) {
  return gaussian_quantile_measure(p.m0_mean, std::sqrt(p.m0_var), n);
}

MeasureFlow lq_oracle_flow(const LqOracle& oracle, const TimeGrid& grid, std::size_t atoms) {
  std::vector<DiscreteMeasure> ms;
  ms.reserve(grid.points());
  for (int j = 0; j <= grid.slots(); ++j) {
    const double t = grid.time(j);
    ms.push_back(gaussian_quantile_measure(oracle.mean_at(t), std::sqrt(std::max(0.0, oracle.variance_at(t))), atoms));
  }
  return MeasureFlow(grid, std::move(ms));
}

ModelSpec bounded_model() {
  ModelSpec m;
  m.name = "bounded";
  m.d = m.d1 = m.d2 = 1;
  m.T = 1.0;
  m.drift = [](double, std::span<const double>, const MeasureView&, std::span<const double> g, std::span<double> out) {
    out[0] = g[0];
  };
  m.diffusion = [](double, std::span<const double>, const MeasureView&, std::span<double> out) { out[0] = 1.0; };
  m.running_cost = [](double, std::span<const double> x, const MeasureView& nu, std::span<const double> g) {
    return g[0] * g[0] + std::min(x[0] * x[0], 1.0) + std::min(nu.second_moment(), 1.0);
  };
  m.terminal_cost = [](std::span<const double> x, const MeasureView&) { return std::min(x[0] * x[0], 1.0); };
  m.K = 2.0;
  m.L = 2.0;
  m.c0 = 1.0;
  m.r0 = 1.0;
  m.gamma_set = ControlSet::box({-1.0}, {1.0});
  m.gamma0 = {0.0};
  m.delta0 = 0.5;
  return m;
}

DiscreteMeasure bounded_initial_measure(std::size_t n) {
  if (n == 0) throw InvalidArgument("empty sample");
  std::vector<double> atoms(n);
  for (std::size_t i = 0; i < n; ++i) atoms[i] = -1.0 + 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return empirical_measure(1, atoms);
}

ModelSpec ou_model() {
  ModelSpec m;
  m.name = "ou";
  m.d = m.d1 = m.d2 = 1;
  m.T = 1.0;
  m.drift = [](double, std::span<const double> x, const MeasureView&, std::span<const double>, std::span<double> out) {
    out[0] = -x[0];
  };
  m.diffusion = [](double, std::span<const double>, const MeasureView&, std::span<double> out) { out[0] = 1.0; };
  m.running_cost = [](double, std::span<const double>, const MeasureView&, std::span<const double> g) {
    return 0.5 * g[0] * g[0];
  };
  m.terminal_cost = [](std::span<const double>, const MeasureView&) { return 0.0; };
  m.K = 1.0;
  m.L = 1.0;
  m.c0 = 0.25;
  m.r0 = 1.0;
  m.gamma_set = ControlSet::whole_space(1);
  m.gamma0 = {0.0};
  m.delta0 = 0.5;
  return m;
}

}  // namespace mfg
