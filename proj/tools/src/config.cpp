#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/io.hpp"

namespace mfglab {
namespace {

using mfg::InvalidArgument;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"model", {"name", "a", "abar", "c", "s", "q", "kappa", "qT", "kappaT", "m0_mean", "m0_var", "T"}},
      {"discretization",
       {"k", "state_lower", "state_upper", "state_nodes", "substeps", "quadrature", "quadrature_nodes",
        "quadrature_samples"}},
      {"solver", {"particles", "damping", "tol", "max_iters", "M"}},
      {"study",
       {"name", "N_list", "repetitions", "deviators", "delta0", "steps", "M_list", "probes", "monotonicity_nodes",
        "monotonicity_substeps", "constants"}},
      {"run", {"seed", "output"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw InvalidArgument("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InvalidArgument("config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& text, F conv) {
  std::vector<T> out;
  for (const auto& part : split(text)) out.push_back(conv(key, part));
  if (out.empty()) throw InvalidArgument("config key '" + key + "': empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += mfg::format_number(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw InvalidArgument("config key '" + key + "': " + what);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(model == "lq" || model == "bounded" || model == "ou", "model.name", "expected lq, bounded or ou");
  if (model == "lq") lq.validate();
  require(k >= 1 && k <= 10, "discretization.k", "must lie in [1, 10]");
  require(state_lower < state_upper, "discretization.state_lower", "must be below state_upper");
  require(state_nodes >= 2 && state_nodes <= 100001, "discretization.state_nodes", "must lie in [2, 100001]");
  require(substeps >= 1 && substeps <= 64, "discretization.substeps", "must lie in [1, 64]");
  require(rule.nodes >= 1 && rule.nodes <= 64, "discretization.quadrature_nodes", "must lie in [1, 64]");
  require(rule.samples >= 1 && rule.samples <= 100000, "discretization.quadrature_samples",
          "must lie in [1, 100000]");
  require(particles >= 2 && particles % 2 == 0 && particles <= 1000000, "solver.particles",
          "must be even and in [2, 1000000]");
  require(damping > 0.0 && damping <= 1.0, "solver.damping", "must lie in (0, 1]");
  require(tol >= 0.0, "solver.tol", "must be >= 0");
  require(max_iters >= 1 && max_iters <= 10000, "solver.max_iters", "must lie in [1, 10000]");
  require(M > 0.0 && M <= 64.0, "solver.M", "must lie in (0, 64]");
  require(study.empty() || study == "solve-mfg" || study == "simulate-nplayer" || study == "nash-gap" ||
              study == "convergence-study" || study == "value-monotonicity" || study == "diagnostics",
          "study.name", "unknown study '" + study + "'");
  for (std::size_t n : N_list) require(n >= 1 && n <= 100000, "study.N_list", "entries must lie in [1, 100000]");
  require(repetitions >= 1 && repetitions <= 10000, "study.repetitions", "must lie in [1, 10000]");
  require(deviators >= 1, "study.deviators", "must be >= 1");
  const double T = model == "lq" ? lq.T : 1.0;
  require(delta0 > 0.0 && delta0 <= std::min(1.0, T), "study.delta0", "must lie in (0, min(1, T)]");
  require(steps >= 0 && steps <= 1000000, "study.steps", "must lie in [0, 1000000]");
  for (std::size_t i = 0; i < M_list.size(); ++i) {
    require(M_list[i] >= 1 && M_list[i] <= 12, "study.M_list", "entries must lie in [1, 12]");
    require(i == 0 || M_list[i] > M_list[i - 1], "study.M_list", "must be strictly ascending");
  }
  require(monotonicity_nodes >= 2, "study.monotonicity_nodes", "must be >= 2");
  require(monotonicity_substeps >= 1, "study.monotonicity_substeps", "must be >= 1");
  require(!output.empty(), "run.output", "must not be empty");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  using mfg::format_number;
  std::vector<std::pair<std::string, std::string>> e{
      {"model.name", model},
      {"discretization.k", std::to_string(k)},
      {"discretization.state_lower", format_number(state_lower)},
      {"discretization.state_upper", format_number(state_upper)},
      {"discretization.state_nodes", std::to_string(state_nodes)},
      {"discretization.substeps", std::to_string(substeps)},
      {"discretization.quadrature",
       rule.kind == mfg::NoiseRule::Kind::kGaussHermite ? "gauss-hermite" : "monte-carlo"},
      {"discretization.quadrature_nodes", std::to_string(rule.nodes)},
      {"discretization.quadrature_samples", std::to_string(rule.samples)},
      {"solver.particles", std::to_string(particles)},
      {"solver.damping", format_number(damping)},
      {"solver.tol", format_number(tol)},
      {"solver.max_iters", std::to_string(max_iters)},
      {"solver.M", format_number(M)},
      {"study.name", study},
      {"study.N_list", join(N_list)},
      {"study.repetitions", std::to_string(repetitions)},
      {"study.deviators", std::to_string(deviators)},
      {"study.delta0", format_number(delta0)},
      {"study.steps", std::to_string(steps)},
      {"study.M_list", join(M_list)},
      {"study.probes", join(probes)},
      {"study.monotonicity_nodes", std::to_string(monotonicity_nodes)},
      {"study.monotonicity_substeps", std::to_string(monotonicity_substeps)},
      {"study.constants", join(constants)},
      {"run.seed", std::to_string(seed)},
      {"run.output", output},
  };
  if (model == "lq") {
    const std::pair<const char*, double> params[] = {
        {"a", lq.a},         {"abar", lq.abar},       {"c", lq.c},           {"s", lq.s},
        {"q", lq.q},         {"kappa", lq.kappa},     {"qT", lq.qT},         {"kappaT", lq.kappaT},
        {"m0_mean", lq.m0_mean}, {"m0_var", lq.m0_var}, {"T", lq.T}};
    for (const auto& [key, v] : params) e.emplace_back(std::string("model.") + key, format_number(v));
  }
  std::sort(e.begin(), e.end());
  return e;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& [key, value] : entries()) {
    if (key == "run.output") continue;
    for (char ch : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument(std::string("config parse error: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  ExperimentConfig cfg;
  bool lq_keys = false;
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) throw InvalidArgument("config key '" + section + "' must be inside a section");
      throw InvalidArgument("unknown config section '" + section + "'");
    }
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (!it->second.count(key)) throw InvalidArgument("unknown config key '" + full + "'");
      const std::string v = trim(node.data());
      if (section == "model") {
        if (key == "name") {
          cfg.model = v;
          continue;
        }
        lq_keys = true;
        const double x = to_double(full, v);
        if (key == "a") cfg.lq.a = x;
        if (key == "abar") cfg.lq.abar = x;
        if (key == "c") cfg.lq.c = x;
        if (key == "s") cfg.lq.s = x;
        if (key == "q") cfg.lq.q = x;
        if (key == "kappa") cfg.lq.kappa = x;
        if (key == "qT") cfg.lq.qT = x;
        if (key == "kappaT") cfg.lq.kappaT = x;
        if (key == "m0_mean") cfg.lq.m0_mean = x;
        if (key == "m0_var") cfg.lq.m0_var = x;
        if (key == "T") cfg.lq.T = x;
      } else if (section == "discretization") {
        if (key == "k") cfg.k = to_int<int>(full, v);
        if (key == "state_lower") cfg.state_lower = to_double(full, v);
        if (key == "state_upper") cfg.state_upper = to_double(full, v);
        if (key == "state_nodes") cfg.state_nodes = to_int<int>(full, v);
        if (key == "substeps") cfg.substeps = to_int<int>(full, v);
        if (key == "quadrature") {
          if (v == "gauss-hermite") {
            cfg.rule.kind = mfg::NoiseRule::Kind::kGaussHermite;
          } else if (v == "monte-carlo") {
            cfg.rule.kind = mfg::NoiseRule::Kind::kMonteCarlo;
          } else {
            throw InvalidArgument("config key '" + full + "': expected gauss-hermite or monte-carlo");
          }
        }
        if (key == "quadrature_nodes") cfg.rule.nodes = to_int<int>(full, v);
        if (key == "quadrature_samples") cfg.rule.samples = to_int<int>(full, v);
      } else if (section == "solver") {
        if (key == "particles") cfg.particles = to_int<std::size_t>(full, v);
        if (key == "damping") cfg.damping = to_double(full, v);
        if (key == "tol") cfg.tol = to_double(full, v);
        if (key == "max_iters") cfg.max_iters = to_int<int>(full, v);
        if (key == "M") cfg.M = to_double(full, v);
      } else if (section == "study") {
        if (key == "name") cfg.study = v;
        if (key == "N_list") cfg.N_list = to_list<std::size_t>(full, v, to_int<std::size_t>);
        if (key == "repetitions") cfg.repetitions = to_int<int>(full, v);
        if (key == "deviators") cfg.deviators = to_int<int>(full, v);
        if (key == "delta0") cfg.delta0 = to_double(full, v);
        if (key == "steps") cfg.steps = to_int<int>(full, v);
        if (key == "M_list") cfg.M_list = to_list<int>(full, v, to_int<int>);
        if (key == "probes") cfg.probes = to_list<double>(full, v, to_double);
        if (key == "monotonicity_nodes") cfg.monotonicity_nodes = to_int<int>(full, v);
        if (key == "monotonicity_substeps") cfg.monotonicity_substeps = to_int<int>(full, v);
        if (key == "constants") cfg.constants = to_list<double>(full, v, to_double);
      } else if (section == "run") {
        if (key == "seed") cfg.seed = to_int<std::uint64_t>(full, v);
        if (key == "output") cfg.output = v;
      }
    }
  }
  if (lq_keys && cfg.model != "lq") throw InvalidArgument("config key 'model': LQ parameters only apply to model lq");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

}  // namespace mfglab
