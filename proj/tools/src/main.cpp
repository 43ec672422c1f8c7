#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "config.hpp"
#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "studies.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mfglab: mean-field game solver and N-player verification studies"};
  app.set_version_flag("--version", mfglab::kVersion);
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  const char* studies[][2] = {
      {"solve-mfg", "Solve the mean-field fixed point and write flow, value and policy tables"},
      {"simulate-nplayer", "Simulate the i.i.d. N-player profile built from the mean-field policy"},
      {"nash-gap", "Estimate deviation gaps of the i.i.d. profile with common random numbers"},
      {"convergence-study", "Flow distance, deviation gap and tightness statistics across N"},
      {"value-monotonicity", "Truncated values V_{M,M}(0, x) over a list of M"},
      {"diagnostics", "Assumption checks, moment certificate and tightness statistics"},
  };
  for (const auto& [name, help] : studies) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI experiment file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Overrides run.seed");
    sub->add_option("--out", out, "Output directory (overrides run.output)");
    sub->add_option("--threads", threads, "Worker threads; results do not depend on it")->check(CLI::Range(1, 1024));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string study = app.get_subcommands().front()->get_name();
  mfglab::ExperimentConfig cfg;
  try {
    cfg = mfglab::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output = out;
  } catch (const mfg::InvalidArgument& e) {
    std::cerr << "mfglab: " << e.what() << '\n';
    return 2;
  }
  mfg::set_thread_count(threads);
  const int status = mfglab::run_study(study, cfg, cfg.output);
  if (status != 0) std::cerr << "mfglab: study failed (exit " << status << "), see " << cfg.output << "/events.jsonl\n";
  return status;
}
