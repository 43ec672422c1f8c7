#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "mfg/models.hpp"
#include "mfg/quadrature.hpp"

namespace mfglab {

// INI experiment description. Sections and keys (defaults in brackets):
//   [model]          name (lq | bounded | ou) [lq]; LQ only: a, abar, c, s, q,
//                    kappa, qT, kappaT, m0_mean, m0_var, T
//   [discretization] k [5], state_lower [-3], state_upper [3], state_nodes [201],
//                    substeps [4], quadrature (gauss-hermite | monte-carlo),
//                    quadrature_nodes [7], quadrature_samples [64]
//   [solver]         particles [1024], damping [0.5], tol [1e-3], max_iters [40], M [4]
//   [study]          name, N_list [8,32,128,512], repetitions [8], deviators [8],
//                    delta0 [0.5], steps [0 = 2^k * substeps], M_list [1,2,4,8],
//                    probes [-1,0,1], monotonicity_nodes [101],
//                    monotonicity_substeps [2], constants [-0.5,0,0.5]
//   [run]            seed [0], output [out]
struct ExperimentConfig {
  std::string model = "lq";
  mfg::LqParams lq;

  int k = 5;
  double state_lower = -3.0;
  double state_upper = 3.0;
  int state_nodes = 201;
  int substeps = 4;
  mfg::NoiseRule rule;

  std::size_t particles = 1024;
  double damping = 0.5;
  double tol = 1e-3;
  int max_iters = 40;
  double M = 4.0;

  std::string study;
  std::vector<std::size_t> N_list{8, 32, 128, 512};
  int repetitions = 8;
  int deviators = 8;
  double delta0 = 0.5;
  int steps = 0;
  std::vector<int> M_list{1, 2, 4, 8};
  std::vector<double> probes{-1.0, 0.0, 1.0};
  int monotonicity_nodes = 101;
  int monotonicity_substeps = 2;
  std::vector<double> constants{-0.5, 0.0, 0.5};

  std::uint64_t seed = 0;
  std::string output = "out";

  // Throws mfg::InvalidArgument naming the offending field.
  void validate() const;
  int simulation_steps() const { return steps > 0 ? steps : (1 << k) * substeps; }
  // Every effective value as (section.key, text), sorted by key.
  std::vector<std::pair<std::string, std::string>> entries() const;
  // FNV-1a of the canonical "key=value" lines except run.output, as 16 hex digits.
  std::string hash() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace mfglab
