#pragma once

#include <cstddef>
#include <span>

#include "mfg/model.hpp"

namespace mfg::detail {

// x_out = x + b dt + sigma dw. Every simulator in the library goes through
// this function so that identical inputs give bit-identical paths.
inline void euler_step(const ModelSpec& model, double t, double dt, std::span<const double> x, const MeasureView& nu,
                       std::span<const double> gamma, std::span<const double> dw, std::span<double> out) {
  const auto d = static_cast<std::size_t>(model.d);
  const auto d1 = static_cast<std::size_t>(model.d1);
  double b[16];
  double sig[64];
  model.drift(t, x, nu, gamma, {b, d});
  model.diffusion(t, x, nu, {sig, d * d1});
  for (std::size_t r = 0; r < d; ++r) {
    double v = x[r] + b[r] * dt;
    for (std::size_t c = 0; c < d1; ++c) v += sig[r * d1 + c] * dw[c];
    out[r] = v;
  }
}

}  // namespace mfg::detail
