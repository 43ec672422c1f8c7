#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfg/control_set.hpp"
#include "mfg/measures.hpp"

namespace mfg {

// Coefficients take the measure argument as a MeasureView so that callers can
// hand in either a population snapshot or a snapshot mixed with the caller's
// own state.
using DriftFn = std::function<void(double t, std::span<const double> x, const MeasureView& nu,
                                   std::span<const double> gamma, std::span<double> out)>;
// Writes the d x d1 dispersion matrix row-major.
using DiffusionFn =
    std::function<void(double t, std::span<const double> x, const MeasureView& nu, std::span<double> out)>;
using RunningCostFn = std::function<double(double t, std::span<const double> x, const MeasureView& nu,
                                           std::span<const double> gamma)>;
using TerminalCostFn = std::function<double(std::span<const double> x, const MeasureView& nu)>;

// A symmetric game: state dimension d, noise dimension d1, action dimension
// d2, horizon T, coefficients b, sigma, f, F, and the declared constants the
// assumption checks compare against. Gamma_0 is taken to be contained in the
// ball of radius r0.
struct ModelSpec {
  std::string name;
  int d = 1;
  int d1 = 1;
  int d2 = 1;
  double T = 1.0;

  DriftFn drift;
  DiffusionFn diffusion;
  RunningCostFn running_cost;
  TerminalCostFn terminal_cost;

  double K = 1.0;
  double L = 1.0;
  double c0 = 1.0;
  double r0 = 1.0;
  ControlSet gamma_set = ControlSet::whole_space(1);
  std::vector<double> gamma0{0.0};
  double delta0 = 0.5;

  // Throws InvalidArgument when dimensions, constants, gamma0 or delta0 are
  // inconsistent or a coefficient is missing.
  void validate() const;
};

}  // namespace mfg
