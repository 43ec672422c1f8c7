#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "mfg/dynamics.hpp"
#include "mfg/mfg_solver.hpp"
#include "mfg/models.hpp"
#include "mfg/nash.hpp"

namespace mfglab {

inline constexpr const char* kVersion = "0.1.0";

struct Benchmark {
  std::string name;
  mfg::ModelSpec model;
  std::optional<mfg::LqParams> lq;
  // Deterministic n-atom quantile sample of the initial law.
  std::function<mfg::DiscreteMeasure(std::size_t n)> initial_measure;
  // N i.i.d. draws from the initial law, from substream (seed, initial, 0).
  std::function<std::vector<double>(std::size_t N, std::uint64_t seed)> sample_initial;
};

Benchmark make_benchmark(const ExperimentConfig& cfg);
mfg::MfgParams mfg_params(const ExperimentConfig& cfg);
mfg::MfgSolution solve(const Benchmark& bench, const ExperimentConfig& cfg,
                       const std::function<void(const mfg::IterationRecord&)>& on_iteration = {});
// psi built from the final policy and the flow it was computed against.
mfg::StrategyPtr mfg_strategy(const Benchmark& bench, const mfg::MfgSolution& sol);

// Repetition r of an N-player run uses seed derive_seed(derive_seed(seed, N), r).
std::uint64_t repetition_seed(std::uint64_t seed, std::size_t N, int r);

struct NPlayerRuns {
  std::size_t N = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> initials;
  std::vector<mfg::PathBundle> bundles;
};

NPlayerRuns simulate_profile(const Benchmark& bench, const mfg::StrategyProfile& profile, int repetitions,
                             int steps, std::uint64_t seed);

// max over the bundle grid of d2(mu^N(t_j), reference(t_j)).
double sup_flow_distance(const mfg::PathBundle& bundle, const mfg::MeasureFlow& reference);

struct GapOptions {
  int deviators = 8;
  std::vector<double> constants{-0.5, 0.0, 0.5};
};

// Candidates: the DP best response (same grids as sol.dp, self weight 1/N)
// to the flow pooled over all players and repetitions, then the constants.
// min(deviators, N) evenly spaced players deviate.
mfg::DeviationResult profile_gap(const Benchmark& bench, const mfg::MfgSolution& sol, const mfg::StrategyProfile& profile,
                                 const NPlayerRuns& runs, const GapOptions& options);

struct ConvergenceOptions {
  std::vector<std::size_t> N_list{8, 32, 128, 512};
  int repetitions = 8;
  double delta0 = 0.5;
  int steps = 128;
  std::uint64_t seed = 0;
  GapOptions gap;
};

struct ConvergenceRow {
  std::size_t N = 0;
  int repetition = 0;
  std::uint64_t seed = 0;
  double sup_d2 = 0.0;
  double tightness_statistic = 0.0;
  double g = 0.0;
  double epsilon_hat = 0.0;
  double epsilon_se = 0.0;
};

struct ConvergenceSummary {
  std::size_t N = 0;
  double median_d2 = 0.0;
  double epsilon_hat = 0.0;
  double epsilon_se = 0.0;
  std::size_t best_candidate = 0;
  double median_g = 0.0;
  double max_g = 0.0;
  double mean_tightness_statistic = 0.0;
  std::size_t designated = 0;
  double designated_cost = 0.0;
  double mean_cost = 0.0;
  double spread = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSummary> summaries;
  std::vector<mfg::DeviationResult> gaps;
};

ConvergenceResult convergence_study(const Benchmark& bench, const mfg::MfgSolution& sol,
                                    const ConvergenceOptions& options);
ConvergenceOptions convergence_options(const ExperimentConfig& cfg);

// Runs one study into out_dir (created if needed) and returns the exit status:
// 0 success, 2 invalid input, 3 numeric failure, 1 anything else.
int run_study(const std::string& study, const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace mfglab
