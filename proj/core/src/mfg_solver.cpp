#include "mfg/mfg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mfg/detail/euler.hpp"
#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

constexpr std::uint64_t kInitialStream = 0;

int pow2(int level) {
  if (level < 0 || level > 24) throw InvalidArgument("dyadic level must be in [0, 24]");
  return 1 << level;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

double control_lattice_spacing(int k, int dim) {
  if (k < 1) throw InvalidArgument("control grid level k must be >= 1");
  const double kd = static_cast<double>(k);
  const int p1 = static_cast<int>(std::ceil(2.0 * std::log2(kd) - 1e-12));
  const int p2 = static_cast<int>(std::ceil(std::log2(kd * std::sqrt(static_cast<double>(dim))) - 1e-12));
  return std::ldexp(1.0, -std::max({p1, p2, 0}));
}

ControlGrid build_control_grid(const ModelSpec& model, double M, int k) {
  model.validate();
  if (!(M > 0.0)) throw InvalidArgument("truncation radius M must be positive");
  const int dim = model.d2;
  const auto d = static_cast<std::size_t>(dim);
  ControlGrid grid;
  grid.M = M;
  grid.k = k;
  grid.dim = dim;
  grid.spacing = control_lattice_spacing(k, dim);

  // Candidates: lattice points in the ball of radius M + 1 (a margin that
  // does not depend on M or k keeps the grids nested).
  const double reach = M + 1.0;
  const long long n = static_cast<long long>(std::floor(reach / grid.spacing));
  const long long side = 2 * n + 1;
  double total = 1.0;
  for (std::size_t c = 0; c < d; ++c) total *= static_cast<double>(side);
  if (total > 5e7) throw InvalidArgument("control grid too large; lower M or k");
  std::vector<long long> idx(d, -n);
  std::vector<double> p(d);
  std::vector<double> q(d);
  std::vector<std::vector<double>> kept;
  const double m2 = M * M * (1.0 + 1e-12);
  for (;;) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      p[c] = static_cast<double>(idx[c]) * grid.spacing;
      r2 += p[c] * p[c];
    }
    if (r2 <= reach * reach) {
      model.gamma_set.project(p, q);
      double q2 = 0.0;
      for (double v : q) q2 += v * v;
      if (q2 <= m2) kept.push_back(q);
    }
    std::size_t c = d;
    while (c > 0) {
      --c;
      if (++idx[c] <= n) break;
      idx[c] = -n;
      if (c == 0) {
        c = d + 1;
        break;
      }
    }
    if (c == d + 1) break;
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return lex_less(a, b); });
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.empty()) kept.push_back(model.gamma0);
  for (const auto& a : kept) grid.atoms.insert(grid.atoms.end(), a.begin(), a.end());
  return grid;
}

SlotTransition::SlotTransition(const ModelSpec& model, const MeasureFlow& flow, TimeGrid time_grid, int substeps,
                               double self_weight)
    : model_(&model),
      fine_(time_grid.horizon(), time_grid.slots() * std::max(substeps, 1)),
      substeps_(substeps),
      self_weight_(self_weight) {
  if (substeps < 1) throw InvalidArgument("sub-step count S must be >= 1");
  if (!(self_weight >= 0.0 && self_weight < 1.0)) throw InvalidArgument("self weight must lie in [0, 1)");
  if (flow.size() == 0 || flow.dim() != model.d) throw InvalidArgument("flow dimension differs from the model");
  if (std::fabs(flow.horizon() - time_grid.horizon()) > 1e-9 * time_grid.horizon() || flow.times()[0] != 0.0) {
    throw InvalidArgument("flow must cover [0, T]");
  }
  slices_.resize(fine_.points());
  times_.resize(fine_.points());
  for (int f = 0; f <= fine_.slots(); ++f) {
    times_[static_cast<std::size_t>(f)] = fine_.time(f);
    slices_[static_cast<std::size_t>(f)] = &flow.at_time(times_[static_cast<std::size_t>(f)]);
  }
  dt_ = fine_.step();
}

double SlotTransition::step(int fine_index, std::span<double> x, std::span<const double> gamma,
                            std::span<const double> dw) const {
  const ModelSpec& model = *model_;
  const auto d = static_cast<std::size_t>(model.d);
  const auto f = static_cast<std::size_t>(fine_index);
  const double t = times_[f];
  const MeasureView view = self_weight_ > 0.0 ? MeasureView(*slices_[f], x, self_weight_) : MeasureView(*slices_[f]);
  const double cost = model.running_cost(t, x, view, gamma) * dt_;
  double next[16];
  detail::euler_step(model, t, dt_, x, view, gamma, dw, {next, d});
  for (std::size_t r = 0; r < d; ++r) x[r] = next[r];
  return cost;
}

double SlotTransition::run(int slot, std::span<double> x, std::span<const double> gamma,
                           std::span<const double> dw, std::span<double> trace) const {
  const auto d = static_cast<std::size_t>(model_->d);
  const auto d1 = static_cast<std::size_t>(model_->d1);
  double cost = 0.0;
  for (int s = 0; s < substeps_; ++s) {
    cost += step(slot * substeps_ + s, x, gamma, dw.subspan(static_cast<std::size_t>(s) * d1, d1));
    if (!trace.empty()) std::copy(x.begin(), x.end(), trace.begin() + static_cast<std::ptrdiff_t>(s * static_cast<int>(d)));
  }
  return cost;
}

double SlotTransition::terminal(std::span<const double> x) const {
  const DiscreteMeasure& mu = *slices_.back();
  if (self_weight_ > 0.0) return model_->terminal_cost(x, MeasureView(mu, x, self_weight_));
  return model_->terminal_cost(x, mu);
}

DpResult backward_dp(const ModelSpec& model, const MeasureFlow& flow, const ControlGrid& cgrid,
                     const StateGrid& sgrid, const DpOptions& options) {
  model.validate();
  if (options.k < 0) throw InvalidArgument("DP level k must be >= 0");
  const int time_level = options.time_level < 0 ? options.k : options.time_level;
  if (time_level < options.k) throw InvalidArgument("transition level must be >= decision level");
  if (sgrid.dim() != model.d) throw InvalidArgument("state grid dimension differs from the model");
  if (cgrid.dim != model.d2 || cgrid.size() == 0) throw InvalidArgument("control grid is empty or has wrong dimension");

  DpResult res;
  res.sgrid = sgrid;
  res.cgrid = cgrid;
  res.decision_grid = TimeGrid(model.T, pow2(options.k));
  res.time_grid = TimeGrid(model.T, pow2(time_level));
  res.substeps = options.substeps;
  res.self_weight = options.self_weight;
  const SlotTransition phi(model, flow, res.time_grid, options.substeps, options.self_weight);

  const Quadrature quad = build_quadrature(options.rule, model.d1);
  const std::size_t Q = quad.size();
  const auto S = static_cast<std::size_t>(options.substeps);
  const auto d = static_cast<std::size_t>(model.d);
  const auto d1 = static_cast<std::size_t>(model.d1);
  // Linear noise path: each sub-step gets 1/S of the slot increment.
  std::vector<double> dw(Q * S * d1);
  const double scale = std::sqrt(res.time_grid.step()) / static_cast<double>(S);
  for (std::size_t q = 0; q < Q; ++q) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t c = 0; c < d1; ++c) dw[(q * S + s) * d1 + c] = scale * quad.point(q)[c];
    }
  }

  const std::size_t nodes = sgrid.size();
  const std::size_t A = cgrid.size();
  const int slots = res.decision_grid.slots();
  const int hold = res.hold();
  res.value.slices = slots + 1;
  res.value.nodes = nodes;
  res.value.values.assign(static_cast<std::size_t>(slots + 1) * nodes, 0.0);
  res.policy.slots = slots;
  res.policy.nodes = nodes;
  res.policy.index.assign(static_cast<std::size_t>(slots) * nodes, 0);

  std::vector<double> node_coords(nodes * d);
  for (std::size_t n = 0; n < nodes; ++n) sgrid.node(n, std::span<double>(node_coords.data() + n * d, d));

  double* terminal = res.value.values.data() + static_cast<std::size_t>(slots) * nodes;
  for (std::size_t n = 0; n < nodes; ++n) {
    terminal[n] = phi.terminal(std::span<const double>(node_coords.data() + n * d, d));
    if (!std::isfinite(terminal[n])) {
      throw NumericError("non-finite terminal cost at node " + std::to_string(n));
    }
  }

  std::vector<double> current(A * nodes);
  std::vector<double> next(A * nodes);
  std::vector<std::size_t> outside(nodes, 0);
  std::size_t successors = 0;
  for (int j = slots - 1; j >= 0; --j) {
    const std::span<const double> v_next = res.value.slice(j + 1);
    for (int r = hold - 1; r >= 0; --r) {
      const int l = j * hold + r;
      const bool last = r == hold - 1;
      parallel_for(nodes, [&](std::size_t n) {
        const std::span<const double> x0(node_coords.data() + n * d, d);
        const int f0 = l * static_cast<int>(S);
        const double t0 = phi.fine_grid().time(f0);
        const double dt = phi.fine_grid().step();
        const DiscreteMeasure& mu0 = phi.measure(f0);
        const MeasureView view0 = options.self_weight > 0.0 ? MeasureView(mu0, x0, options.self_weight) : MeasureView(mu0);
        double x[16];
        double b0[16];
        double sig0[64];
        model.diffusion(t0, x0, view0, {sig0, d * d1});
        std::size_t out_count = 0;
        for (std::size_t a = 0; a < A; ++a) {
          const std::span<const double> source =
              last ? v_next : std::span<const double>(current.data() + a * nodes, nodes);
          const auto gamma = cgrid.atom(a);
          // The first sub-step starts from the node for every quadrature point.
          const double cost0 = model.running_cost(t0, x0, view0, gamma) * dt;
          model.drift(t0, x0, view0, gamma, {b0, d});
          double sum = 0.0;
          for (std::size_t q = 0; q < Q; ++q) {
            const double* wq = dw.data() + q * S * d1;
            for (std::size_t r = 0; r < d; ++r) {
              double v = x0[r] + b0[r] * dt;
              for (std::size_t c = 0; c < d1; ++c) v += sig0[r * d1 + c] * wq[c];
              x[r] = v;
            }
            double cost = cost0;
            for (std::size_t s = 1; s < S; ++s) {
              cost += phi.step(f0 + static_cast<int>(s), {x, d}, gamma, {wq + s * d1, d1});
            }
            if (!sgrid.inside({x, d})) ++out_count;
            sum += quad.weights[q] * (cost + sgrid.interpolate(source, {x, d}));
          }
          if (!std::isfinite(sum)) {
            throw NumericError("non-finite DP value at j=" + std::to_string(l) + ", node=" + std::to_string(n) +
                               ", atom=" + std::to_string(a));
          }
          next[a * nodes + n] = sum;
        }
        outside[n] += out_count;
      });
      successors += nodes * A * Q;
      std::swap(current, next);
    }
    double* vj = res.value.values.data() + static_cast<std::size_t>(j) * nodes;
    std::uint32_t* pj = res.policy.index.data() + static_cast<std::size_t>(j) * nodes;
    for (std::size_t n = 0; n < nodes; ++n) {
      double best = current[n];
      std::uint32_t arg = 0;
      for (std::size_t a = 1; a < A; ++a) {
        if (current[a * nodes + n] < best) {
          best = current[a * nodes + n];
          arg = static_cast<std::uint32_t>(a);
        }
      }
      vj[n] = best;
      pj[n] = arg;
    }
  }
  std::size_t out_total = 0;
  for (std::size_t c : outside) out_total += c;
  res.boundary_fraction = successors ? static_cast<double>(out_total) / static_cast<double>(successors) : 0.0;
  return res;
}

namespace {

class NoiseFeedbackAgent;

class NoiseFeedbackStrategy final : public Strategy, public std::enable_shared_from_this<NoiseFeedbackStrategy> {
 public:
  NoiseFeedbackStrategy(const ModelSpec& model, std::shared_ptr<const MeasureFlow> flow,
                        std::shared_ptr<const DpResult> dp)
      : model_(model),
        flow_(std::move(flow)),
        dp_(std::move(dp)),
        phi_(model_, *flow_, dp_->time_grid, dp_->substeps, dp_->self_weight) {}

  bool narrow() const override { return true; }
  std::unique_ptr<Agent> spawn(const AgentInit& init) const override;
  std::string name() const override { return "noise-feedback"; }

  const ModelSpec& model() const { return model_; }
  const DpResult& dp() const { return *dp_; }
  const SlotTransition& phi() const { return phi_; }

 private:
  ModelSpec model_;
  std::shared_ptr<const MeasureFlow> flow_;
  std::shared_ptr<const DpResult> dp_;
  SlotTransition phi_;
};

class NoiseFeedbackAgent final : public Agent {
 public:
  NoiseFeedbackAgent(const NoiseFeedbackStrategy& owner, std::span<const double> xi)
      : owner_(owner), x_(xi.begin(), xi.end()) {}

  void act(const Observation& obs, std::span<double> gamma) override {
    const DpResult& dp = owner_.dp();
    const TimeGrid& g = *obs.grid;
    const int slots = dp.time_grid.slots();
    if (std::fabs(g.horizon() - dp.time_grid.horizon()) > 1e-12 * g.horizon() || g.slots() % slots != 0) {
      throw InvalidArgument("noise grid is incompatible with the policy time step");
    }
    const int m = g.slots() / slots;
    if (obs.step % m == 0) {
      const int l = obs.step / m;
      while (done_ < l) advance(obs.increments, m);
      if (l % dp.hold() == 0) held_ = dp.policy.at(l / dp.hold(), dp.sgrid.nearest(x_));
    }
    const auto a = dp.cgrid.atom(held_);
    std::copy(a.begin(), a.end(), gamma.begin());
  }

 private:
  // Runs the recursion across transition slot done_.
  void advance(std::span<const double> increments, int m) {
    const DpResult& dp = owner_.dp();
    const auto d1 = static_cast<std::size_t>(owner_.model().d1);
    const int S = dp.substeps;
    const auto base = static_cast<std::size_t>(done_) * static_cast<std::size_t>(m);
    dw_.assign(static_cast<std::size_t>(S) * d1, 0.0);
    if (m == S) {
      std::copy(increments.begin() + static_cast<std::ptrdiff_t>(base * d1),
                increments.begin() + static_cast<std::ptrdiff_t>((base + static_cast<std::size_t>(m)) * d1),
                dw_.begin());
    } else {
      // Piecewise-linear W inside the slot, read at the sub-step times.
      std::vector<double> cum((static_cast<std::size_t>(m) + 1) * d1, 0.0);
      for (std::size_t u = 0; u < static_cast<std::size_t>(m); ++u) {
        for (std::size_t c = 0; c < d1; ++c) cum[(u + 1) * d1 + c] = cum[u * d1 + c] + increments[(base + u) * d1 + c];
      }
      auto w_at = [&](double pos, std::size_t c) {
        const auto i = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(m) - 1);
        const double frac = pos - static_cast<double>(i);
        return (1.0 - frac) * cum[i * d1 + c] + frac * cum[(i + 1) * d1 + c];
      };
      for (int s = 0; s < S; ++s) {
        const double p0 = static_cast<double>(s) * m / S;
        const double p1 = static_cast<double>(s + 1) * m / S;
        for (std::size_t c = 0; c < d1; ++c) dw_[static_cast<std::size_t>(s) * d1 + c] = w_at(p1, c) - w_at(p0, c);
      }
    }
    owner_.phi().run(done_, x_, dp.cgrid.atom(held_), dw_);
    for (double v : x_) {
      if (!std::isfinite(v)) throw NumericError("noise-feedback recursion left the finite range");
    }
    ++done_;
  }

  const NoiseFeedbackStrategy& owner_;
  std::vector<double> x_;
  std::vector<double> dw_;
  int done_ = 0;
  std::uint32_t held_ = 0;
};

std::unique_ptr<Agent> NoiseFeedbackStrategy::spawn(const AgentInit& init) const {
  if (init.xi.size() != static_cast<std::size_t>(model_.d)) throw InvalidArgument("initial state has wrong dimension");
  return std::make_unique<NoiseFeedbackAgent>(*this, init.xi);
}

}  // namespace

StrategyPtr noise_feedback_strategy(const ModelSpec& model, std::shared_ptr<const MeasureFlow> flow,
                                    std::shared_ptr<const DpResult> dp) {
  if (!flow || !dp) throw InvalidArgument("noise_feedback_strategy needs a flow and a DP result");
  return std::make_shared<NoiseFeedbackStrategy>(model, std::move(flow), std::move(dp));
}

std::vector<double> initial_particles(const DiscreteMeasure& m0, std::size_t count, std::uint64_t seed) {
  if (m0.empty()) throw InvalidArgument("initial measure is empty");
  const auto d = static_cast<std::size_t>(m0.dim());
  if (m0.size() == count && m0.has_uniform_weights()) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lex_less(m0.atom(a), m0.atom(b)); });
    std::vector<double> out;
    out.reserve(count * d);
    for (std::size_t i : order) out.insert(out.end(), m0.atom(i).begin(), m0.atom(i).end());
    return out;
  }
  const DiscreteMeasure r = stratified_resample(m0, count, seed, kInitialStream);
  return {r.coords().begin(), r.coords().end()};
}

ParticleRun push_particles(const ModelSpec& model, const MeasureFlow& flow, const DpResult& dp,
                           std::span<const double> initial, std::uint64_t seed) {
  const auto d = static_cast<std::size_t>(model.d);
  const auto d1 = static_cast<std::size_t>(model.d1);
  const auto d2 = static_cast<std::size_t>(model.d2);
  if (initial.empty() || initial.size() % d != 0) throw InvalidArgument("initial particles have wrong size");
  const std::size_t P = initial.size() / d;
  if (P < 2 || P % 2 != 0) throw InvalidArgument("particle count must be even and >= 2");
  const SlotTransition phi(model, flow, dp.time_grid, dp.substeps, dp.self_weight);
  const TimeGrid fine = phi.fine_grid();
  const auto J = static_cast<std::size_t>(fine.slots());
  const auto S = static_cast<std::size_t>(dp.substeps);
  const int hold = dp.hold();
  const std::size_t half = P / 2;

  ParticleRun run;
  run.grid = fine;
  run.particles = P;
  run.states.resize((J + 1) * P * d);
  run.controls.resize(J * P * d2);
  run.increments.resize(P * J * d1);
  run.costs.resize(P);
  const double sqdt = std::sqrt(fine.step());

  parallel_for(half, [&](std::size_t pair) {
    const rng::Substream stream(seed, rng::Purpose::kNoise, pair);
    for (int member = 0; member < 2; ++member) {
      const std::size_t p = member == 0 ? pair : half + pair;
      const std::size_t atom = member == 0 ? pair : P - 1 - pair;
      const double scale = member == 0 ? sqdt : -sqdt;
      double* inc = run.increments.data() + p * J * d1;
      for (std::size_t k = 0; k < J * d1; ++k) inc[k] = scale * stream.normal(k);
      std::vector<double> x(initial.begin() + static_cast<std::ptrdiff_t>(atom * d),
                            initial.begin() + static_cast<std::ptrdiff_t>((atom + 1) * d));
      std::copy(x.begin(), x.end(), run.states.begin() + static_cast<std::ptrdiff_t>(p * d));
      double cost = 0.0;
      std::uint32_t held = 0;
      std::vector<double> trace(S * d);
      for (int l = 0; l < dp.time_grid.slots(); ++l) {
        if (l % hold == 0) held = dp.policy.at(l / hold, dp.sgrid.nearest(x));
        const auto gamma = dp.cgrid.atom(held);
        cost += phi.run(l, x, gamma, std::span<const double>(inc + static_cast<std::size_t>(l) * S * d1, S * d1),
                        trace);
        for (std::size_t s = 0; s < S; ++s) {
          const std::size_t f = static_cast<std::size_t>(l) * S + s;
          std::copy(gamma.begin(), gamma.end(), run.controls.begin() + static_cast<std::ptrdiff_t>((f * P + p) * d2));
          std::copy(trace.begin() + static_cast<std::ptrdiff_t>(s * d),
                    trace.begin() + static_cast<std::ptrdiff_t>((s + 1) * d),
                    run.states.begin() + static_cast<std::ptrdiff_t>(((f + 1) * P + p) * d));
        }
        for (double v : x) {
          if (!std::isfinite(v)) throw NumericError("non-finite particle state for particle " + std::to_string(p));
        }
      }
      run.costs[p] = cost + phi.terminal(x);
    }
  });
  run.mean_cost = 0.0;
  for (double c : run.costs) run.mean_cost += c;
  run.mean_cost /= static_cast<double>(P);
  double ss = 0.0;
  for (std::size_t p = 0; p < half; ++p) {
    const double m = 0.5 * (run.costs[p] + run.costs[half + p]) - run.mean_cost;
    ss += m * m;
  }
  run.cost_se = half > 1 ? std::sqrt(ss / static_cast<double>(half - 1) / static_cast<double>(half)) : 0.0;
  std::vector<DiscreteMeasure> measures;
  measures.reserve(J + 1);
  for (std::size_t j = 0; j <= J; ++j) {
    measures.push_back(empirical_measure(model.d, std::span<const double>(run.states.data() + j * P * d, P * d)));
  }
  run.flow = MeasureFlow(fine, std::move(measures));
  return run;
}

double mean_initial_value(const DpResult& dp, const DiscreteMeasure& mu) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < mu.size(); ++i) total += mu.weight(i) * dp.value_at(0, mu.atom(i));
  return static_cast<double>(total);
}

MonotonicityTable value_monotonicity_study(const ModelSpec& model, const MeasureFlow& flow, const StateGrid& sgrid,
                                           const std::vector<int>& M_list, std::span<const double> probes,
                                           int substeps, const NoiseRule& rule) {
  if (M_list.empty()) throw InvalidArgument("value_monotonicity_study needs at least one M");
  for (std::size_t i = 0; i < M_list.size(); ++i) {
    if (M_list[i] < 1) throw InvalidArgument("M values must be >= 1");
    if (i > 0 && M_list[i] <= M_list[i - 1]) throw InvalidArgument("M values must be strictly ascending");
  }
  const auto d = static_cast<std::size_t>(model.d);
  if (probes.empty() || probes.size() % d != 0) throw InvalidArgument("probe states have wrong size");
  MonotonicityTable table;
  table.probes.assign(probes.begin(), probes.end());
  const int level = M_list.back();
  for (int M : M_list) {
    const ControlGrid cgrid = build_control_grid(model, static_cast<double>(M), M);
    DpOptions opt;
    opt.k = M;
    opt.time_level = level;
    opt.substeps = substeps;
    opt.rule = rule;
    const DpResult dp = backward_dp(model, flow, cgrid, sgrid, opt);
    MonotonicityRow row;
    row.M = M;
    row.atoms = cgrid.size();
    for (std::size_t p = 0; p < probes.size() / d; ++p) row.values.push_back(dp.value_at(0, probes.subspan(p * d, d)));
    table.rows.push_back(std::move(row));
  }
  table.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    for (std::size_t p = 0; p < table.rows[r].values.size(); ++p) {
      table.max_increase = std::max(table.max_increase, table.rows[r].values[p] - table.rows[r - 1].values[p]);
    }
  }
  if (table.rows.size() < 2) table.max_increase = 0.0;
  return table;
}

MfgSolution solve_mfg(const ModelSpec& model, const DiscreteMeasure& m0, const MfgParams& params,
                      const std::function<void(const IterationRecord&)>& on_iteration) {
  model.validate();
  if (m0.dim() != model.d) throw InvalidArgument("initial measure dimension differs from the model");
  if (params.particles < 2 || params.particles % 2 != 0) throw InvalidArgument("particle count must be even and >= 2");
  if (!(params.damping > 0.0 && params.damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
  if (params.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(params.tol >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
  const ControlGrid cgrid = build_control_grid(model, params.M, params.k);
  DpOptions opt;
  opt.k = params.k;
  opt.substeps = params.substeps;
  opt.rule = params.rule;
  const TimeGrid fine(model.T, pow2(params.k) * params.substeps);
  const std::size_t P = params.particles;

  MfgSolution sol;
  sol.initial = initial_particles(m0, P, params.seed);
  const DiscreteMeasure start = empirical_measure(model.d, sol.initial);
  std::shared_ptr<const MeasureFlow> iterate;
  if (params.warm_start) {
    if (params.warm_start->dim() != model.d) throw InvalidArgument("warm start dimension differs from the model");
    if (std::fabs(params.warm_start->horizon() - model.T) > 1e-9 * model.T) {
      throw InvalidArgument("warm start must cover [0, T]");
    }
    std::vector<DiscreteMeasure> first;
    first.reserve(fine.points());
    for (int j = 0; j <= fine.slots(); ++j) {
      first.push_back(stratified_resample(params.warm_start->at_time(fine.time(j)), P, params.seed,
                                          1 + static_cast<std::uint64_t>(j)));
    }
    iterate = std::make_shared<const MeasureFlow>(fine, std::move(first));
  } else {
    iterate = std::make_shared<const MeasureFlow>(MeasureFlow::constant(fine, start));
  }
  MeasureFlow previous_pass;
  for (int it = 1; it <= params.max_iters; ++it) {
    auto dp = std::make_shared<const DpResult>(backward_dp(model, *iterate, cgrid, params.sgrid, opt));
    ParticleRun run = push_particles(model, *iterate, *dp, sol.initial, params.seed);
    std::vector<DiscreteMeasure> mixed;
    mixed.reserve(fine.points());
    for (std::size_t j = 0; j < fine.points(); ++j) {
      mixed.push_back(stratified_resample(mixture(iterate->at(j), run.flow.at(j), params.damping), P, params.seed,
                                          1 + j));
    }
    auto next = std::make_shared<const MeasureFlow>(fine, std::move(mixed));
    IterationRecord rec;
    rec.iteration = it;
    rec.residual = flow_distance(*next, *iterate);
    rec.pass_change = it > 1 ? flow_distance(run.flow, previous_pass) : std::numeric_limits<double>::quiet_NaN();
    rec.mean_cost = run.mean_cost;
    rec.mean_value = mean_initial_value(*dp, m0);
    rec.boundary_fraction = dp->boundary_fraction;
    if (!std::isfinite(rec.residual) || !std::isfinite(rec.mean_cost)) {
      throw NumericError("fixed-point iteration diverged at iteration " + std::to_string(it));
    }
    sol.history.push_back(rec);
    if (on_iteration) on_iteration(rec);
    sol.iterations = it;
    sol.residual = rec.residual;
    sol.converged = rec.residual <= params.tol;
    const bool stop = sol.converged || it == params.max_iters;
    if (stop) {
      sol.flow = run.flow;
      sol.iterate = iterate;
      sol.dp = dp;
      sol.value_mean = rec.mean_value;
      sol.optimality_gap = run.mean_cost - rec.mean_value;
      sol.particles = std::move(run);
      break;
    }
    previous_pass = std::move(run.flow);
    iterate = std::move(next);
  }
  return sol;
}

}  // namespace mfg
