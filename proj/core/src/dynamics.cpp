#include "mfg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfg/detail/euler.hpp"
#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Index of the flow slice at grid time t; the flow must have a point there.
std::size_t flow_slice(const MeasureFlow& flow, double t, double horizon) {
  const std::size_t idx = flow.index_at(t);
  if (std::fabs(flow.times()[idx] - t) > 1e-9 * horizon) {
    throw InvalidArgument("flow time grid does not contain the simulation grid");
  }
  return idx;
}

void check_flow(const ModelSpec& model, const MeasureFlow& flow, const TimeGrid& grid) {
  if (flow.size() == 0 || flow.dim() != model.d) throw InvalidArgument("flow dimension differs from the model");
  if (std::fabs(flow.horizon() - grid.horizon()) > 1e-12 * grid.horizon()) {
    throw InvalidArgument("flow and noise horizons differ");
  }
}

using detail::euler_step;

class ConstantAgent final : public Agent {
 public:
  explicit ConstantAgent(const std::vector<double>& g) : g_(g) {}
  void act(const Observation&, std::span<double> gamma) override { std::copy(g_.begin(), g_.end(), gamma.begin()); }

 private:
  const std::vector<double>& g_;
};

class ConstantStrategy final : public Strategy {
 public:
  explicit ConstantStrategy(std::vector<double> g) : g_(std::move(g)) {}
  bool narrow() const override { return true; }
  std::unique_ptr<Agent> spawn(const AgentInit&) const override { return std::make_unique<ConstantAgent>(g_); }
  std::string name() const override {
    std::string s = "constant(";
    for (std::size_t c = 0; c < g_.size(); ++c) s += (c ? "," : "") + std::to_string(g_[c]);
    return s + ")";
  }

 private:
  std::vector<double> g_;
};

class OpenLoopAgent final : public Agent {
 public:
  explicit OpenLoopAgent(const StepControl& u) : u_(u) {}
  void act(const Observation& obs, std::span<double> gamma) override {
    const int slot = u_.grid().slots() == obs.grid->slots()
                         ? obs.step
                         : std::min(u_.grid().slots() - 1,
                                    static_cast<int>(std::floor(obs.t / u_.grid().step() * (1.0 + 1e-12))));
    const auto v = u_.value(slot);
    std::copy(v.begin(), v.end(), gamma.begin());
  }

 private:
  const StepControl& u_;
};

class OpenLoopStrategy final : public Strategy {
 public:
  explicit OpenLoopStrategy(StepControl u) : u_(std::move(u)) {}
  bool narrow() const override { return true; }
  std::unique_ptr<Agent> spawn(const AgentInit&) const override { return std::make_unique<OpenLoopAgent>(u_); }
  std::string name() const override { return "open-loop"; }

 private:
  StepControl u_;
};

class FeedbackAgent final : public Agent {
 public:
  explicit FeedbackAgent(const FeedbackFn& phi) : phi_(phi) {}
  void act(const Observation& obs, std::span<double> gamma) override {
    phi_(obs.t, obs.own_state, obs.all_states, gamma);
  }

 private:
  const FeedbackFn& phi_;
};

class FeedbackStrategy final : public Strategy {
 public:
  FeedbackStrategy(FeedbackFn phi, std::string name) : phi_(std::move(phi)), name_(std::move(name)) {}
  bool narrow() const override { return false; }
  std::unique_ptr<Agent> spawn(const AgentInit&) const override { return std::make_unique<FeedbackAgent>(phi_); }
  std::string name() const override { return name_; }

 private:
  FeedbackFn phi_;
  std::string name_;
};

}  // namespace

NoisePath::NoisePath(TimeGrid grid, int dim, std::vector<double> increments)
    : grid_(grid), dim_(dim), increments_(std::move(increments)) {
  if (dim_ < 1) throw InvalidArgument("noise dimension must be >= 1");
  const auto d = static_cast<std::size_t>(dim_);
  const auto J = static_cast<std::size_t>(grid_.slots());
  if (increments_.size() != J * d) throw InvalidArgument("noise path needs one increment per slot");
  path_.assign((J + 1) * d, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t c = 0; c < d; ++c) path_[(j + 1) * d + c] = path_[j * d + c] + increments_[j * d + c];
  }
}

NoisePath NoisePath::sample(TimeGrid grid, int dim, std::uint64_t seed, std::uint64_t stream, double sign) {
  const rng::Substream s(seed, rng::Purpose::kNoise, stream);
  const double scale = sign * std::sqrt(grid.step());
  const std::size_t n = static_cast<std::size_t>(grid.slots()) * static_cast<std::size_t>(dim);
  std::vector<double> inc(n);
  for (std::size_t k = 0; k < n; ++k) inc[k] = scale * s.normal(k);
  return NoisePath(grid, dim, std::move(inc));
}

StrategyPtr constant_strategy(std::vector<double> gamma) {
  return std::make_shared<ConstantStrategy>(std::move(gamma));
}

StrategyPtr open_loop_strategy(StepControl u) { return std::make_shared<OpenLoopStrategy>(std::move(u)); }

StrategyPtr feedback_strategy(FeedbackFn phi, std::string name) {
  return std::make_shared<FeedbackStrategy>(std::move(phi), std::move(name));
}

std::vector<double> PathBundle::state_path(std::size_t i) const {
  const auto dd = static_cast<std::size_t>(d);
  std::vector<double> out(grid.points() * dd);
  for (int j = 0; j <= grid.slots(); ++j) {
    const auto s = state(j, i);
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * dd));
  }
  return out;
}

StepControl PathBundle::control_path(std::size_t i) const {
  const auto dd = static_cast<std::size_t>(d2);
  std::vector<double> values(static_cast<std::size_t>(grid.slots()) * dd);
  for (int j = 0; j < grid.slots(); ++j) {
    const auto s = control(j, i);
    std::copy(s.begin(), s.end(), values.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * dd));
  }
  return StepControl(grid, d2, std::move(values));
}

NoisePath PathBundle::noise(std::size_t i) const {
  const std::size_t n = static_cast<std::size_t>(grid.slots()) * static_cast<std::size_t>(d1);
  return NoisePath(grid, d1,
                   std::vector<double>(increments.begin() + static_cast<std::ptrdiff_t>(i * n),
                                       increments.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
}

PathBundle simulate_n_player(const ModelSpec& model, const StrategyProfile& profile,
                             std::span<const double> initials, std::uint64_t seed, int steps) {
  model.validate();
  const std::size_t N = profile.size();
  if (N == 0) throw InvalidArgument("strategy profile is empty");
  const auto d = static_cast<std::size_t>(model.d);
  const auto d1 = static_cast<std::size_t>(model.d1);
  const auto d2 = static_cast<std::size_t>(model.d2);
  if (initials.size() != N * d) throw InvalidArgument("need one initial state per player");
  for (const auto& s : profile) {
    if (!s) throw InvalidArgument("strategy profile contains a null strategy");
  }
  const TimeGrid grid(model.T, steps);
  const auto J = static_cast<std::size_t>(steps);
  const double dt = grid.step();

  PathBundle bundle;
  bundle.grid = grid;
  bundle.d = model.d;
  bundle.d1 = model.d1;
  bundle.d2 = model.d2;
  bundle.players = N;
  bundle.initials.assign(initials.begin(), initials.end());
  bundle.theta.resize(N);
  bundle.increments.resize(N * J * d1);
  bundle.states.resize((J + 1) * N * d);
  bundle.controls.resize(J * N * d2);

  const double sqdt = std::sqrt(dt);
  parallel_for(N, [&](std::size_t i) {
    bundle.theta[i] = rng::Substream(seed, rng::Purpose::kTheta, i).uniform(0);
    const rng::Substream s(seed, rng::Purpose::kNoise, i);
    for (std::size_t k = 0; k < J * d1; ++k) bundle.increments[i * J * d1 + k] = sqdt * s.normal(k);
  });

  std::vector<std::unique_ptr<Agent>> agents(N);
  for (std::size_t i = 0; i < N; ++i) {
    agents[i] = profile[i]->spawn({i, initials.subspan(i * d, d), bundle.theta[i]});
  }
  std::copy(initials.begin(), initials.end(), bundle.states.begin());

  std::vector<DiscreteMeasure> measures;
  measures.reserve(J + 1);
  for (std::size_t j = 0; j < J; ++j) {
    const std::span<const double> current(bundle.states.data() + j * N * d, N * d);
    measures.push_back(empirical_measure(model.d, current));
    const DiscreteMeasure& mu = measures.back();
    const double t = grid.time(static_cast<int>(j));
    parallel_for(N, [&](std::size_t i) {
      const bool narrow = profile[i]->narrow();
      Observation obs;
      obs.step = static_cast<int>(j);
      obs.t = t;
      obs.grid = &grid;
      obs.increments = std::span<const double>(bundle.increments.data() + i * J * d1, j * d1);
      const auto x = current.subspan(i * d, d);
      if (!narrow) {
        obs.own_state = x;
        obs.all_states = current;
      }
      std::span<double> gamma(bundle.controls.data() + (j * N + i) * d2, d2);
      agents[i]->act(obs, gamma);
      if (!model.gamma_set.contains(gamma, 1e-9)) {
        throw InvalidArgument("strategy '" + profile[i]->name() + "' of player " + std::to_string(i) +
                              " chose an action outside the action set at step " + std::to_string(j));
      }
      std::span<double> next(bundle.states.data() + ((j + 1) * N + i) * d, d);
      euler_step(model, t, dt, x, mu, gamma,
                 std::span<const double>(bundle.increments.data() + (i * J + j) * d1, d1), next);
      for (double v : next) {
        if (!std::isfinite(v)) {
          throw NumericError("non-finite state for player " + std::to_string(i) + " at step " +
                             std::to_string(j + 1));
        }
      }
    });
  }
  measures.push_back(empirical_measure(model.d, std::span<const double>(bundle.states.data() + J * N * d, N * d)));
  bundle.flow = MeasureFlow(grid, std::move(measures));
  return bundle;
}

std::vector<double> simulate_frozen_flow(const ModelSpec& model, const MeasureFlow& flow, const StepControl& u,
                                         std::span<const double> x0, const NoisePath& noise) {
  if (!(u.grid() == noise.grid())) throw InvalidArgument("control and noise grids differ");
  std::vector<SlotMeasure> slots;
  slots.reserve(static_cast<std::size_t>(u.grid().slots()));
  for (int j = 0; j < u.grid().slots(); ++j) {
    const auto v = u.value(j);
    slots.push_back({{v.begin(), v.end()}, {1.0}});
  }
  return simulate_frozen_flow(model, flow, RelaxedControlPath(u.grid(), u.dim(), std::move(slots)), x0, noise);
}

std::vector<double> simulate_frozen_flow(const ModelSpec& model, const MeasureFlow& flow,
                                         const RelaxedControlPath& r, std::span<const double> x0,
                                         const NoisePath& noise) {
  const TimeGrid& grid = noise.grid();
  if (!(r.grid() == grid)) throw InvalidArgument("control and noise grids differ");
  if (noise.dim() != model.d1 || r.dim() != model.d2 || x0.size() != static_cast<std::size_t>(model.d)) {
    throw InvalidArgument("frozen-flow simulation: dimension mismatch");
  }
  check_flow(model, flow, grid);
  const auto d = static_cast<std::size_t>(model.d);
  const auto d1 = static_cast<std::size_t>(model.d1);
  const double dt = grid.step();
  std::vector<double> path(grid.points() * d);
  std::copy(x0.begin(), x0.end(), path.begin());
  std::vector<double> b(d);
  std::vector<double> bsum(d);
  std::vector<double> sig(d * d1);
  for (int j = 0; j < grid.slots(); ++j) {
    const double t = grid.time(j);
    const DiscreteMeasure& mu = flow.at(flow_slice(flow, t, grid.horizon()));
    const std::span<const double> x(path.data() + static_cast<std::size_t>(j) * d, d);
    std::fill(bsum.begin(), bsum.end(), 0.0);
    for (std::size_t a = 0; a < r.atom_count(j); ++a) {
      model.drift(t, x, mu, r.atom(j, a), b);
      const double w = r.slot(j).weights[a];
      for (std::size_t c = 0; c < d; ++c) bsum[c] += w * b[c];
    }
    model.diffusion(t, x, mu, sig);
    const auto dw = noise.increment(j);
    for (std::size_t c = 0; c < d; ++c) {
      double v = x[c] + bsum[c] * dt;
      for (std::size_t e = 0; e < d1; ++e) v += sig[c * d1 + e] * dw[e];
      if (!std::isfinite(v)) throw NumericError("non-finite state at step " + std::to_string(j + 1));
      path[(static_cast<std::size_t>(j) + 1) * d + c] = v;
    }
  }
  return path;
}

std::vector<double> simulate_frozen_flow(const ModelSpec& model, const MeasureFlow& flow, const Strategy& strategy,
                                         const AgentInit& init, const NoisePath& noise,
                                         std::vector<double>* controls) {
  const TimeGrid& grid = noise.grid();
  if (noise.dim() != model.d1 || init.xi.size() != static_cast<std::size_t>(model.d)) {
    throw InvalidArgument("frozen-flow simulation: dimension mismatch");
  }
  check_flow(model, flow, grid);
  const auto d = static_cast<std::size_t>(model.d);
  const auto d1 = static_cast<std::size_t>(model.d1);
  const auto d2 = static_cast<std::size_t>(model.d2);
  const double dt = grid.step();
  auto agent = strategy.spawn(init);
  const bool narrow = strategy.narrow();
  std::vector<double> path(grid.points() * d);
  std::copy(init.xi.begin(), init.xi.end(), path.begin());
  std::vector<double> gamma(d2);
  if (controls) controls->assign(static_cast<std::size_t>(grid.slots()) * d2, 0.0);
  for (int j = 0; j < grid.slots(); ++j) {
    const double t = grid.time(j);
    const DiscreteMeasure& mu = flow.at(flow_slice(flow, t, grid.horizon()));
    const std::span<const double> x(path.data() + static_cast<std::size_t>(j) * d, d);
    Observation obs;
    obs.step = j;
    obs.t = t;
    obs.grid = &grid;
    obs.increments = noise.increments().first(static_cast<std::size_t>(j) * d1);
    if (!narrow) {
      obs.own_state = x;
      obs.all_states = mu.coords();
    }
    agent->act(obs, gamma);
    if (controls) std::copy(gamma.begin(), gamma.end(), controls->begin() + static_cast<std::ptrdiff_t>(j * d2));
    std::span<double> next(path.data() + (static_cast<std::size_t>(j) + 1) * d, d);
    euler_step(model, t, dt, x, mu, gamma, noise.increment(j), next);
    for (double v : next) {
      if (!std::isfinite(v)) throw NumericError("non-finite state at step " + std::to_string(j + 1));
    }
  }
  return path;
}

double frozen_flow_cost(const ModelSpec& model, const MeasureFlow& flow, std::span<const double> states,
                        std::span<const double> controls, const TimeGrid& grid) {
  const auto d = static_cast<std::size_t>(model.d);
  const auto d2 = static_cast<std::size_t>(model.d2);
  double cost = 0.0;
  for (int j = 0; j < grid.slots(); ++j) {
    const double t = grid.time(j);
    const DiscreteMeasure& mu = flow.at(flow_slice(flow, t, grid.horizon()));
    cost += model.running_cost(t, states.subspan(static_cast<std::size_t>(j) * d, d), mu,
                               controls.subspan(static_cast<std::size_t>(j) * d2, d2)) *
            grid.step();
  }
  const DiscreteMeasure& muT = flow.at(flow_slice(flow, grid.horizon(), grid.horizon()));
  cost += model.terminal_cost(states.subspan(static_cast<std::size_t>(grid.slots()) * d, d), muT);
  return cost;
}

namespace {

struct Sample {
  double t;
  std::vector<double> x;
  std::vector<double> gamma;
  DiscreteMeasure nu;
};

class Draws {
 public:
  Draws(std::uint64_t seed, std::uint64_t stream) : s_(seed, rng::Purpose::kSampling, stream) {}
  double uniform() { return s_.uniform(n_++); }
  double normal() { return s_.normal(n_++); }

 private:
  rng::Substream s_;
  std::uint64_t n_ = 0;
};

std::vector<double> draw_action(const ModelSpec& model, Draws& draws, double scale) {
  const auto d2 = static_cast<std::size_t>(model.d2);
  std::vector<double> raw(d2);
  std::vector<double> g(d2);
  const ControlSet& set = model.gamma_set;
  if (set.is_box()) {
    for (std::size_t c = 0; c < d2; ++c) {
      const double lo = set.lower()[c];
      const double hi = set.upper()[c];
      if (std::isfinite(lo) && std::isfinite(hi)) {
        g[c] = lo + (hi - lo) * draws.uniform();
      } else {
        raw[c] = scale * draws.normal();
        g[c] = std::clamp(raw[c], lo, hi);
      }
    }
    return g;
  }
  for (std::size_t c = 0; c < d2; ++c) raw[c] = scale * draws.normal();
  set.project(raw, g);
  return g;
}

DiscreteMeasure draw_measure(const ModelSpec& model, Draws& draws, double scale, int atoms) {
  const auto d = static_cast<std::size_t>(model.d);
  const double spread = scale * draws.uniform();
  std::vector<double> centre(d);
  for (auto& c : centre) c = scale * draws.normal();
  std::vector<double> coords(static_cast<std::size_t>(atoms) * d);
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = centre[k % d] + spread * draws.normal();
  return empirical_measure(model.d, coords);
}

// Same atoms each moved by an independent Gaussian step.
DiscreteMeasure perturb(const DiscreteMeasure& nu, Draws& draws, double scale) {
  std::vector<double> coords(nu.coords().begin(), nu.coords().end());
  for (auto& v : coords) v += scale * draws.normal();
  return empirical_measure(nu.dim(), coords);
}

void raise(std::vector<std::string>& flags, const std::string& what, double value, double bound) {
  if (value > bound * (1.0 + 1e-9) + 1e-12) {
    flags.push_back(what + " = " + std::to_string(value) + " exceeds " + std::to_string(bound));
  }
}

}  // namespace

AssumptionReport validate_assumptions(const ModelSpec& model, const AssumptionSampler& sampler, int n_samples) {
  model.validate();
  if (n_samples < 1) throw InvalidArgument("validate_assumptions needs n_samples >= 1");
  const auto d = static_cast<std::size_t>(model.d);
  const auto d1 = static_cast<std::size_t>(model.d1);
  AssumptionReport rep;
  rep.min_f = std::numeric_limits<double>::infinity();
  rep.min_F = std::numeric_limits<double>::infinity();
  rep.coercivity = std::numeric_limits<double>::infinity();
  std::vector<double> b(d), bt(d), sig(d * d1), sigt(d * d1);
  for (int n = 0; n < n_samples; ++n) {
    Draws draws(sampler.seed, static_cast<std::uint64_t>(n));
    const double t = model.T * draws.uniform();
    std::vector<double> x(d);
    for (auto& v : x) v = sampler.state_scale * draws.normal();
    const auto gamma = draw_action(model, draws, sampler.action_scale);
    const DiscreteMeasure nu = draw_measure(model, draws, sampler.state_scale, sampler.measure_atoms);
    const double m2 = nu.second_moment();
    const double sm = std::sqrt(m2);

    model.drift(t, x, nu, gamma, b);
    model.diffusion(t, x, nu, sig);
    rep.growth_b = std::max(rep.growth_b, norm(b) / (1.0 + norm(x) + norm(gamma) + sm));
    rep.growth_sigma = std::max(rep.growth_sigma, norm(sig) / (1.0 + norm(x) + sm));
    const double f = model.running_cost(t, x, nu, gamma);
    const double F = model.terminal_cost(x, nu);
    rep.min_f = std::min(rep.min_f, f);
    rep.min_F = std::min(rep.min_F, F);
    const double quad = 1.0 + norm2(x) + norm2(gamma) + m2;
    rep.growth_cost = std::max(rep.growth_cost, std::max(std::fabs(f), std::fabs(F)) / quad);

    // Difference quotients: move the state only, the measure only, and both.
    for (int variant = 0; variant < 3; ++variant) {
      std::vector<double> xt = x;
      if (variant != 1) {
        for (auto& v : xt) v += 0.5 * draws.normal();
      }
      const DiscreteMeasure nut = variant == 0 ? nu : perturb(nu, draws, 0.5);
      double dx = 0.0;
      for (std::size_t c = 0; c < d; ++c) dx += (x[c] - xt[c]) * (x[c] - xt[c]);
      dx = std::sqrt(dx);
      const double dnu = variant == 0 ? 0.0 : wasserstein2_distance(nu, nut);
      const double gap = dx + dnu;
      if (!(gap > 1e-12)) continue;
      model.drift(t, xt, nut, gamma, bt);
      model.diffusion(t, xt, nut, sigt);
      double db = 0.0;
      for (std::size_t c = 0; c < d; ++c) db += (b[c] - bt[c]) * (b[c] - bt[c]);
      double ds = 0.0;
      for (std::size_t c = 0; c < d * d1; ++c) ds += (sig[c] - sigt[c]) * (sig[c] - sigt[c]);
      rep.lipschitz_b = std::max(rep.lipschitz_b, std::sqrt(db) / gap);
      rep.lipschitz_sigma = std::max(rep.lipschitz_sigma, std::sqrt(ds) / gap);
      const double ft = model.running_cost(t, xt, nut, gamma);
      const double Ft = model.terminal_cost(xt, nut);
      const double weight = 1.0 + norm(x) + norm(xt) + sm + std::sqrt(nut.second_moment());
      rep.local_lip_cost = std::max(rep.local_lip_cost, (std::fabs(f - ft) + std::fabs(F - Ft)) / (gap * weight));
    }

    // Coercivity outside the ball of radius r0.
    std::vector<double> raw(static_cast<std::size_t>(model.d2));
    double rn = 0.0;
    for (auto& v : raw) {
      v = draws.normal();
      rn += v * v;
    }
    rn = std::sqrt(rn);
    const double radius = model.r0 * (1.0 + 1e-6) + sampler.action_scale * std::fabs(draws.normal());
    for (auto& v : raw) v *= radius / std::max(rn, 1e-300);
    std::vector<double> g(raw.size());
    model.gamma_set.project(raw, g);
    const double gn2 = norm2(g);
    if (gn2 > model.r0 * model.r0) {
      rep.coercivity = std::min(rep.coercivity, model.running_cost(t, x, nu, g) / gn2);
      ++rep.coercivity_samples;
    }
  }
  raise(rep.flags, "sampled |b| growth ratio", rep.growth_b, model.K);
  raise(rep.flags, "sampled |sigma| growth ratio", rep.growth_sigma, model.K);
  raise(rep.flags, "sampled Lipschitz quotient of b", rep.lipschitz_b, model.L);
  raise(rep.flags, "sampled Lipschitz quotient of sigma", rep.lipschitz_sigma, model.L);
  raise(rep.flags, "sampled f/F growth ratio", rep.growth_cost, model.K);
  raise(rep.flags, "sampled local Lipschitz quotient of f, F", rep.local_lip_cost, model.L);
  if (rep.min_f < 0.0) rep.flags.push_back("running cost f takes negative values");
  if (rep.min_F < 0.0) rep.flags.push_back("terminal cost F takes negative values");
  if (rep.coercivity_samples > 0 && rep.coercivity < model.c0 * (1.0 - 1e-9)) {
    rep.flags.push_back("coercivity f >= c0 |gamma|^2 fails outside radius r0 (sampled ratio " +
                        std::to_string(rep.coercivity) + ")");
  }
  if (rep.coercivity_samples == 0) rep.coercivity = 0.0;
  return rep;
}

double moment_constant(double T, double K) {
  const double tv = std::max(T, 1.0);
  const double kv = std::max(K, 1.0);
  return 12.0 * tv * (T + 1.0) * kv * kv * std::exp(24.0 * (T + 1.0) * K * K * T);
}

MomentReport moment_certificate(std::span<const PathBundle> bundles, const ModelSpec& model) {
  if (bundles.empty()) throw InvalidArgument("moment certificate needs at least one bundle");
  const PathBundle& first = bundles.front();
  const std::size_t N = first.players;
  const int J = first.grid.slots();
  const auto d = static_cast<std::size_t>(first.d);
  for (const auto& b : bundles) {
    if (b.players != N || !(b.grid == first.grid) || b.d != first.d) {
      throw InvalidArgument("moment certificate: bundles differ in shape");
    }
  }
  const double R = static_cast<double>(bundles.size());
  const double dt = first.grid.step();
  MomentReport rep;
  rep.constant = moment_constant(model.T, model.K);

  // E|X_i(t_j)|^2, E|xi_i|^2, E sum_j |u_i|^2 dt, E sum_j d2(mu, delta_0)^2 dt.
  std::vector<double> sup_x2(N, 0.0);
  std::vector<double> xi2(N, 0.0);
  std::vector<double> energy(N, 0.0);
  double flow_energy = 0.0;
  double pop_sup = 0.0;
  for (int j = 0; j <= J; ++j) {
    std::vector<double> ex2(N, 0.0);
    double pop = 0.0;
    for (const auto& b : bundles) {
      for (std::size_t i = 0; i < N; ++i) {
        const double v = norm2(b.state(j, i));
        ex2[i] += v / R;
        pop += v / (R * static_cast<double>(N));
      }
    }
    for (std::size_t i = 0; i < N; ++i) sup_x2[i] = std::max(sup_x2[i], ex2[i]);
    pop_sup = std::max(pop_sup, pop);
    if (j < J) flow_energy += pop * dt;
  }
  for (const auto& b : bundles) {
    for (std::size_t i = 0; i < N; ++i) {
      xi2[i] += norm2(std::span<const double>(b.initials.data() + i * d, d)) / R;
      double e = 0.0;
      for (int j = 0; j < J; ++j) e += norm2(b.control(j, i)) * dt;
      energy[i] += e / R;
    }
  }
  double worst = -1.0;
  rep.individual_pass = true;
  for (std::size_t i = 0; i < N; ++i) {
    const double rhs = rep.constant * (1.0 + xi2[i] + flow_energy + energy[i]);
    const double lhs = sup_x2[i];
    if (!(lhs <= rhs)) rep.individual_pass = false;
    const double ratio = lhs / rhs;
    if (ratio > worst) {
      worst = ratio;
      rep.worst_player = i;
      rep.individual_lhs = lhs;
      rep.individual_rhs = rhs;
    }
  }
  double avg = 0.0;
  for (std::size_t i = 0; i < N; ++i) avg += (xi2[i] + energy[i]) / static_cast<double>(N);
  rep.population_lhs = pop_sup;
  rep.population_rhs = rep.constant * (1.0 + avg);
  rep.population_pass = pop_sup <= rep.population_rhs;
  return rep;
}

MomentReport moment_certificate(const PathBundle& bundle, const ModelSpec& model) {
  return moment_certificate(std::span<const PathBundle>(&bundle, 1), model);
}

}  // namespace mfg
