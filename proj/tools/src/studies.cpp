#include "studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/io.hpp"
#include "mfg/rng.hpp"

namespace mfglab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const auto secs = std::chrono::system_clock::to_time_t(tp);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return os.str();
}

// JSON-lines event log: {ts, level, event, payload}.
class EventLog {
 public:
  explicit EventLog(const fs::path& path) : out_(path) {
    if (!out_) throw mfg::InvalidArgument("cannot write '" + path.string() + "'");
  }
  void emit(const std::string& level, const std::string& event, json payload = json::object()) {
    json line{{"ts", utc_timestamp(std::chrono::system_clock::now())},
              {"level", level},
              {"event", event},
              {"payload", std::move(payload)}};
    out_ << line.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  EventLog& log;
  std::vector<std::string>& outputs;

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw mfg::InvalidArgument("cannot write '" + (dir / name).string() + "'");
    outputs.push_back(name);
    return f;
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

json record_json(const mfg::IterationRecord& r) {
  return json{{"iteration", r.iteration},
              {"residual", r.residual},
              {"pass_change", std::isfinite(r.pass_change) ? json(r.pass_change) : json(nullptr)},
              {"mean_cost", r.mean_cost},
              {"mean_value", r.mean_value},
              {"boundary_fraction", r.boundary_fraction}};
}

mfg::MfgSolution solve_logged(Context& ctx, const Benchmark& bench) {
  std::ofstream iters = ctx.open("iterations.jsonl");
  auto sol = solve(bench, ctx.cfg, [&](const mfg::IterationRecord& r) {
    iters << record_json(r).dump() << '\n';
    ctx.log.emit("info", "iteration", record_json(r));
  });
  ctx.log.emit(sol.converged ? "info" : "warning", "fixed_point",
               {{"converged", sol.converged}, {"iterations", sol.iterations}, {"residual", sol.residual}});
  return sol;
}

void study_solve_mfg(Context& ctx, const Benchmark& bench) {
  const auto sol = solve_logged(ctx, bench);
  {
    auto f = ctx.open("flow.csv");
    mfg::write_flow_csv(f, sol.flow);
  }
  {
    auto f = ctx.open("value.csv");
    mfg::write_value_csv(f, *sol.dp);
  }
  {
    auto f = ctx.open("policy.csv");
    mfg::write_policy_csv(f, *sol.dp);
  }
  std::vector<std::string> cols{"seed", "iterations", "converged", "residual", "optimality_gap", "value_mean",
                                "mean_cost", "cost_se", "boundary_fraction"};
  if (bench.lq) cols = concat(cols, {"oracle_cost", "mean_error"});
  auto f = ctx.open("summary.csv");
  mfg::CsvWriter w(f, cols);
  w.cell(ctx.cfg.seed)
      .cell(sol.iterations)
      .cell(static_cast<int>(sol.converged))
      .cell(sol.residual)
      .cell(sol.optimality_gap)
      .cell(sol.value_mean)
      .cell(sol.particles.mean_cost)
      .cell(sol.particles.cost_se)
      .cell(sol.dp->boundary_fraction);
  if (bench.lq) {
    const auto oracle = mfg::lq_oracle(*bench.lq, 4000);
    double err = 0.0;
    for (std::size_t j = 0; j < sol.flow.size(); ++j) {
      err = std::max(err, std::fabs(sol.flow.at(j).mean()[0] - oracle.mean_at(sol.flow.times()[j])));
    }
    w.cell(oracle.expected_cost()).cell(err);
    auto o = ctx.open("oracle.csv");
    mfg::write_oracle_csv(o, oracle, sol.particles.grid);
  }
  w.end_row();
}

void study_simulate(Context& ctx, const Benchmark& bench) {
  const auto sol = solve_logged(ctx, bench);
  const auto psi = mfg_strategy(bench, sol);
  const int steps = ctx.cfg.simulation_steps();
  const double dt = bench.model.T / steps;
  const int R = ctx.cfg.repetitions;
  const int d = bench.model.d;
  auto pf = ctx.open("players.csv");
  mfg::CsvWriter players(pf, concat(concat({"N", "seed", "dt", "R", "rep", "player"}, mfg::numbered("xi", d)), {"cost"}));
  auto ff = ctx.open("flows.csv");
  mfg::CsvWriter flows(ff, concat(concat({"N", "seed", "dt", "R", "rep", "j", "t"}, mfg::numbered("mean", d)),
                                  {"second_moment", "d2_to_mfg"}));
  auto mf = ctx.open("moments.csv");
  mfg::CsvWriter moments(mf, {"N", "seed", "dt", "R", "constant", "worst_player", "individual_lhs", "individual_rhs",
                              "population_lhs", "population_rhs", "pass"});
  for (std::size_t N : ctx.cfg.N_list) {
    const auto runs = simulate_profile(bench, mfg::iid_profile(psi, N), R, steps, ctx.cfg.seed);
    for (int r = 0; r < R; ++r) {
      const auto& b = runs.bundles[static_cast<std::size_t>(r)];
      const auto costs = mfg::realized_costs(bench.model, b);
      for (std::size_t i = 0; i < N; ++i) {
        players.cell(N).cell(ctx.cfg.seed).cell(dt).cell(R).cell(r).cell(i);
        for (int c = 0; c < d; ++c) players.cell(b.initials[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)]);
        players.cell(costs[i]).end_row();
      }
      for (int j = 0; j <= steps; ++j) {
        const auto& mu = b.flow.at(static_cast<std::size_t>(j));
        const double t = b.grid.time(j);
        flows.cell(N).cell(ctx.cfg.seed).cell(dt).cell(R).cell(r).cell(j).cell(t);
        for (double m : mu.mean()) flows.cell(m);
        flows.cell(mu.second_moment()).cell(mfg::wasserstein2_distance(mu, sol.flow.at_time(t))).end_row();
      }
    }
    const auto rep = mfg::moment_certificate(runs.bundles, bench.model);
    moments.cell(N)
        .cell(ctx.cfg.seed)
        .cell(dt)
        .cell(R)
        .cell(rep.constant)
        .cell(rep.worst_player)
        .cell(rep.individual_lhs)
        .cell(rep.individual_rhs)
        .cell(rep.population_lhs)
        .cell(rep.population_rhs)
        .cell(static_cast<int>(rep.pass()))
        .end_row();
    auto path = ctx.open("path_N" + std::to_string(N) + ".csv");
    mfg::write_player_path_csv(path, runs.bundles.front(), 0);
    ctx.log.emit("info", "simulated", {{"N", N}, {"repetitions", R}, {"moment_pass", rep.pass()}});
  }
}

void study_nash_gap(Context& ctx, const Benchmark& bench) {
  const auto sol = solve_logged(ctx, bench);
  const auto psi = mfg_strategy(bench, sol);
  const int steps = ctx.cfg.simulation_steps();
  const double dt = bench.model.T / steps;
  const int R = ctx.cfg.repetitions;
  GapOptions gopt;
  gopt.deviators = ctx.cfg.deviators;
  gopt.constants = ctx.cfg.constants;
  auto gf = ctx.open("gaps.csv");
  mfg::CsvWriter gaps(gf, {"N", "seed", "dt", "R", "deviators", "candidate", "name", "mean_gain", "se", "mean_cost",
                           "incumbent_cost", "epsilon_hat", "best"});
  auto cf = ctx.open("conditions.csv");
  mfg::CsvWriter cond(cf, {"N", "seed", "dt", "R", "tightness_statistic", "designated", "designated_cost",
                           "mean_cost", "spread"});
  for (std::size_t N : ctx.cfg.N_list) {
    const auto profile = mfg::iid_profile(psi, N);
    const auto runs = simulate_profile(bench, profile, R, steps, ctx.cfg.seed);
    const auto gap = profile_gap(bench, sol, profile, runs, gopt);
    for (std::size_t c = 0; c < gap.candidates.size(); ++c) {
      const std::string name = c == 0 ? "best-response" : "constant:" + mfg::format_number(gopt.constants[c - 1]);
      const auto& g = gap.candidates[c];
      gaps.cell(N)
          .cell(ctx.cfg.seed)
          .cell(dt)
          .cell(R)
          .cell(gap.players.size())
          .cell(c)
          .cell(name)
          .cell(g.mean_gain)
          .cell(g.se)
          .cell(g.mean_cost)
          .cell(gap.incumbent_cost)
          .cell(gap.epsilon_hat)
          .cell(static_cast<int>(c == gap.best_candidate))
          .end_row();
    }
    const auto costs = mfg::cost_report(bench.model, runs.bundles);
    double stat = 0.0;
    for (const auto& b : runs.bundles) stat += mfg::condition_statistics(b, ctx.cfg.delta0).tightness_statistic;
    stat /= static_cast<double>(runs.bundles.size());
    cond.cell(N)
        .cell(ctx.cfg.seed)
        .cell(dt)
        .cell(R)
        .cell(stat)
        .cell(costs.designated)
        .cell(costs.mean[costs.designated])
        .cell(costs.mean_cost)
        .cell(costs.spread)
        .end_row();
    ctx.log.emit("info", "nash_gap",
                 {{"N", N}, {"epsilon_hat", gap.epsilon_hat}, {"se", gap.best_se}, {"best", gap.best_candidate}});
  }
}

void study_convergence(Context& ctx, const Benchmark& bench) {
  const auto sol = solve_logged(ctx, bench);
  const auto opt = convergence_options(ctx.cfg);
  const auto res = convergence_study(bench, sol, opt);
  const double dt = bench.model.T / opt.steps;
  auto rf = ctx.open("convergence.csv");
  mfg::CsvWriter rows(rf, {"N", "seed", "dt", "R", "rep", "rep_seed", "sup_d2", "tightness_statistic", "g",
                           "epsilon_hat", "epsilon_se"});
  for (const auto& r : res.rows) {
    rows.cell(r.N)
        .cell(ctx.cfg.seed)
        .cell(dt)
        .cell(opt.repetitions)
        .cell(r.repetition)
        .cell(r.seed)
        .cell(r.sup_d2)
        .cell(r.tightness_statistic)
        .cell(r.g)
        .cell(r.epsilon_hat)
        .cell(r.epsilon_se)
        .end_row();
  }
  auto sf = ctx.open("convergence_summary.csv");
  mfg::CsvWriter sum(sf, {"N", "seed", "dt", "R", "median_d2", "epsilon_hat", "epsilon_se", "best_candidate",
                          "median_g", "max_g", "mean_tightness_statistic", "designated", "designated_cost",
                          "mean_cost", "spread"});
  for (const auto& s : res.summaries) {
    sum.cell(s.N)
        .cell(ctx.cfg.seed)
        .cell(dt)
        .cell(opt.repetitions)
        .cell(s.median_d2)
        .cell(s.epsilon_hat)
        .cell(s.epsilon_se)
        .cell(s.best_candidate)
        .cell(s.median_g)
        .cell(s.max_g)
        .cell(s.mean_tightness_statistic)
        .cell(s.designated)
        .cell(s.designated_cost)
        .cell(s.mean_cost)
        .cell(s.spread)
        .end_row();
    ctx.log.emit("info", "convergence",
                 {{"N", s.N}, {"median_d2", s.median_d2}, {"epsilon_hat", s.epsilon_hat}, {"median_g", s.median_g}});
  }
}

void study_monotonicity(Context& ctx, const Benchmark& bench) {
  const auto sol = solve_logged(ctx, bench);
  const int d = bench.model.d;
  if (ctx.cfg.probes.size() % static_cast<std::size_t>(d) != 0) {
    throw mfg::InvalidArgument("config key 'study.probes': need a multiple of d values");
  }
  const auto sgrid = mfg::StateGrid::uniform(d, ctx.cfg.state_lower, ctx.cfg.state_upper, ctx.cfg.monotonicity_nodes);
  const auto table = mfg::value_monotonicity_study(bench.model, *sol.iterate, sgrid, ctx.cfg.M_list, ctx.cfg.probes,
                                                   ctx.cfg.monotonicity_substeps, ctx.cfg.rule);
  auto f = ctx.open("monotonicity.csv");
  mfg::CsvWriter w(f, concat(concat({"M", "atoms", "probe"}, mfg::numbered("x", d)), {"value"}));
  for (const auto& row : table.rows) {
    for (std::size_t p = 0; p < row.values.size(); ++p) {
      w.cell(row.M).cell(row.atoms).cell(p);
      for (int c = 0; c < d; ++c) w.cell(table.probes[p * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)]);
      w.cell(row.values[p]).end_row();
    }
  }
  auto s = ctx.open("monotonicity_summary.csv");
  mfg::CsvWriter ws(s, {"seed", "max_increase", "nonincreasing"});
  ws.cell(ctx.cfg.seed).cell(table.max_increase).cell(static_cast<int>(table.nonincreasing(1e-6))).end_row();
  ctx.log.emit("info", "monotonicity", {{"max_increase", table.max_increase}});
}

void study_diagnostics(Context& ctx, const Benchmark& bench) {
  const auto rep = mfg::validate_assumptions(bench.model, mfg::AssumptionSampler{ctx.cfg.seed}, 2000);
  {
    auto f = ctx.open("assumptions.csv");
    mfg::CsvWriter w(f, {"quantity", "value", "bound", "relation"});
    const auto& m = bench.model;
    w.cell("growth_b").cell(rep.growth_b).cell(m.K).cell("<=").end_row();
    w.cell("growth_sigma").cell(rep.growth_sigma).cell(m.K).cell("<=").end_row();
    w.cell("lipschitz_b").cell(rep.lipschitz_b).cell(m.L).cell("<=").end_row();
    w.cell("lipschitz_sigma").cell(rep.lipschitz_sigma).cell(m.L).cell("<=").end_row();
    w.cell("growth_cost").cell(rep.growth_cost).cell(m.K).cell("<=").end_row();
    w.cell("local_lip_cost").cell(rep.local_lip_cost).cell(m.L).cell("<=").end_row();
    w.cell("min_f").cell(rep.min_f).cell(0.0).cell(">=").end_row();
    w.cell("min_F").cell(rep.min_F).cell(0.0).cell(">=").end_row();
    w.cell("coercivity").cell(rep.coercivity).cell(m.c0).cell(">=").end_row();
  }
  for (const auto& flag : rep.flags) ctx.log.emit("warning", "assumption_flag", {{"flag", flag}});
  const int steps = ctx.cfg.simulation_steps();
  const double dt = bench.model.T / steps;
  const int R = ctx.cfg.repetitions;
  auto f = ctx.open("diagnostics.csv");
  mfg::CsvWriter w(f, {"N", "seed", "dt", "R", "profile", "moment_constant", "individual_lhs", "individual_rhs",
                       "population_lhs", "population_rhs", "moment_pass", "tightness_statistic", "median_g"});
  const auto zero = mfg::constant_strategy(bench.model.gamma0);
  for (std::size_t N : ctx.cfg.N_list) {
    const auto runs = simulate_profile(bench, mfg::iid_profile(zero, N), R, steps, ctx.cfg.seed);
    const auto mom = mfg::moment_certificate(runs.bundles, bench.model);
    double stat = 0.0;
    std::vector<double> gs;
    for (const auto& b : runs.bundles) {
      stat += mfg::condition_statistics(b, ctx.cfg.delta0).tightness_statistic;
      gs.push_back(mfg::tightness_diagnostic(mfg::occupation_measure(b), ctx.cfg.delta0));
    }
    stat /= static_cast<double>(R);
    w.cell(N)
        .cell(ctx.cfg.seed)
        .cell(dt)
        .cell(R)
        .cell("gamma0")
        .cell(mom.constant)
        .cell(mom.individual_lhs)
        .cell(mom.individual_rhs)
        .cell(mom.population_lhs)
        .cell(mom.population_rhs)
        .cell(static_cast<int>(mom.pass()))
        .cell(stat)
        .cell(median(gs))
        .end_row();
  }
  ctx.log.emit("info", "diagnostics", {{"assumption_flags", rep.flags.size()}});
}

}  // namespace

Benchmark make_benchmark(const ExperimentConfig& cfg) {
  Benchmark b;
  b.name = cfg.model;
  if (cfg.model == "lq") {
    const mfg::LqParams p = cfg.lq;
    b.model = mfg::lq_model(p);
    b.lq = p;
    b.initial_measure = [p](std::size_t n) { return mfg::lq_initial_measure(p, n); };
    b.sample_initial = [p](std::size_t N, std::uint64_t seed) {
      const mfg::rng::Substream s(seed, mfg::rng::Purpose::kInitial, 0);
      std::vector<double> xi(N);
      for (std::size_t i = 0; i < N; ++i) xi[i] = p.m0_mean + std::sqrt(p.m0_var) * s.normal(i);
      return xi;
    };
  } else if (cfg.model == "bounded") {
    b.model = mfg::bounded_model();
    b.initial_measure = [](std::size_t n) { return mfg::bounded_initial_measure(n); };
    b.sample_initial = [](std::size_t N, std::uint64_t seed) {
      const mfg::rng::Substream s(seed, mfg::rng::Purpose::kInitial, 0);
      std::vector<double> xi(N);
      for (std::size_t i = 0; i < N; ++i) xi[i] = -1.0 + 2.0 * s.uniform(i);
      return xi;
    };
  } else if (cfg.model == "ou") {
    b.model = mfg::ou_model();
    b.initial_measure = [](std::size_t n) { return mfg::gaussian_quantile_measure(0.0, 0.5, n); };
    b.sample_initial = [](std::size_t N, std::uint64_t seed) {
      const mfg::rng::Substream s(seed, mfg::rng::Purpose::kInitial, 0);
      std::vector<double> xi(N);
      for (std::size_t i = 0; i < N; ++i) xi[i] = 0.5 * s.normal(i);
      return xi;
    };
  } else {
    throw mfg::InvalidArgument("config key 'model.name': unknown model '" + cfg.model + "'");
  }
  return b;
}

mfg::MfgParams mfg_params(const ExperimentConfig& cfg) {
  mfg::MfgParams p;
  p.particles = cfg.particles;
  p.damping = cfg.damping;
  p.max_iters = cfg.max_iters;
  p.tol = cfg.tol;
  p.M = cfg.M;
  p.k = cfg.k;
  p.sgrid = mfg::StateGrid::uniform(1, cfg.state_lower, cfg.state_upper, cfg.state_nodes);
  p.substeps = cfg.substeps;
  p.rule = cfg.rule;
  p.seed = cfg.seed;
  return p;
}

mfg::MfgSolution solve(const Benchmark& bench, const ExperimentConfig& cfg,
                       const std::function<void(const mfg::IterationRecord&)>& on_iteration) {
  auto params = mfg_params(cfg);
  if (bench.model.d != 1) params.sgrid = mfg::StateGrid::uniform(bench.model.d, cfg.state_lower, cfg.state_upper, cfg.state_nodes);
  return mfg::solve_mfg(bench.model, bench.initial_measure(cfg.particles), params, on_iteration);
}

mfg::StrategyPtr mfg_strategy(const Benchmark& bench, const mfg::MfgSolution& sol) {
  return mfg::noise_feedback_strategy(bench.model, sol.iterate, sol.dp);
}

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t N, int r) {
  return mfg::rng::derive_seed(mfg::rng::derive_seed(seed, N), static_cast<std::uint64_t>(r));
}

NPlayerRuns simulate_profile(const Benchmark& bench, const mfg::StrategyProfile& profile, int repetitions, int steps,
                             std::uint64_t seed) {
  NPlayerRuns runs;
  runs.N = profile.size();
  for (int r = 0; r < repetitions; ++r) {
    runs.seeds.push_back(repetition_seed(seed, runs.N, r));
    runs.initials.push_back(bench.sample_initial(runs.N, runs.seeds.back()));
    runs.bundles.push_back(mfg::simulate_n_player(bench.model, profile, runs.initials.back(), runs.seeds.back(), steps));
  }
  return runs;
}

double sup_flow_distance(const mfg::PathBundle& bundle, const mfg::MeasureFlow& reference) {
  double best = 0.0;
  for (int j = 0; j <= bundle.grid.slots(); ++j) {
    const double t = bundle.grid.time(j);
    best = std::max(best, mfg::wasserstein2_distance(bundle.flow.at(static_cast<std::size_t>(j)), reference.at_time(t)));
  }
  return best;
}

mfg::DeviationResult profile_gap(const Benchmark& bench, const mfg::MfgSolution& sol, const mfg::StrategyProfile& profile,
                                 const NPlayerRuns& runs, const GapOptions& options) {
  const std::size_t N = runs.N;
  const auto& grid = runs.bundles.front().grid;
  const int d = bench.model.d;
  std::vector<mfg::DiscreteMeasure> pooled;
  pooled.reserve(grid.points());
  for (int j = 0; j <= grid.slots(); ++j) {
    std::vector<double> pts;
    pts.reserve(N * runs.bundles.size() * static_cast<std::size_t>(d));
    for (const auto& b : runs.bundles) {
      const auto* p = b.states.data() + static_cast<std::size_t>(j) * N * static_cast<std::size_t>(d);
      pts.insert(pts.end(), p, p + N * static_cast<std::size_t>(d));
    }
    pooled.push_back(mfg::empirical_measure(d, pts));
  }
  auto flow = std::make_shared<const mfg::MeasureFlow>(grid, std::move(pooled));
  mfg::DpOptions opt;
  opt.k = sol.dp->decision_grid.slots() > 0 ? static_cast<int>(std::lround(std::log2(sol.dp->decision_grid.slots()))) : 0;
  opt.substeps = sol.dp->substeps;
  opt.self_weight = 1.0 / static_cast<double>(N);
  const auto dp =
      std::make_shared<const mfg::DpResult>(mfg::backward_dp(bench.model, *flow, sol.dp->cgrid, sol.dp->sgrid, opt));
  std::vector<mfg::StrategyPtr> candidates{mfg::noise_feedback_strategy(bench.model, flow, dp)};
  for (double c : options.constants) {
    std::vector<double> gamma(static_cast<std::size_t>(bench.model.d2), c);
    std::vector<double> proj(gamma.size());
    bench.model.gamma_set.project(gamma, proj);
    candidates.push_back(mfg::constant_strategy(proj));
  }
  const std::size_t D = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.deviators, 1)), N);
  std::vector<std::size_t> players;
  for (std::size_t p = 0; p < D; ++p) players.push_back(p * N / D);
  return mfg::deviation_gap(bench.model, profile, players, candidates, runs.initials, runs.seeds, grid.slots());
}

ConvergenceOptions convergence_options(const ExperimentConfig& cfg) {
  ConvergenceOptions o;
  o.N_list = cfg.N_list;
  o.repetitions = cfg.repetitions;
  o.delta0 = cfg.delta0;
  o.steps = cfg.simulation_steps();
  o.seed = cfg.seed;
  o.gap.deviators = cfg.deviators;
  o.gap.constants = cfg.constants;
  return o;
}

ConvergenceResult convergence_study(const Benchmark& bench, const mfg::MfgSolution& sol,
                                    const ConvergenceOptions& options) {
  ConvergenceResult res;
  const auto psi = mfg_strategy(bench, sol);
  for (std::size_t N : options.N_list) {
    const auto profile = mfg::iid_profile(psi, N);
    const auto runs = simulate_profile(bench, profile, options.repetitions, options.steps, options.seed);
    const auto gap = profile_gap(bench, sol, profile, runs, options.gap);
    const auto costs = mfg::cost_report(bench.model, runs.bundles);
    ConvergenceSummary s;
    s.N = N;
    s.epsilon_hat = gap.epsilon_hat;
    s.epsilon_se = gap.best_se;
    s.best_candidate = gap.best_candidate;
    s.designated = costs.designated;
    s.designated_cost = costs.mean[costs.designated];
    s.mean_cost = costs.mean_cost;
    s.spread = costs.spread;
    std::vector<double> d2s;
    std::vector<double> gs;
    for (int r = 0; r < options.repetitions; ++r) {
      const auto& b = runs.bundles[static_cast<std::size_t>(r)];
      ConvergenceRow row;
      row.N = N;
      row.repetition = r;
      row.seed = runs.seeds[static_cast<std::size_t>(r)];
      row.sup_d2 = sup_flow_distance(b, sol.flow);
      row.tightness_statistic = mfg::condition_statistics(b, options.delta0).tightness_statistic;
      row.g = mfg::tightness_diagnostic(mfg::occupation_measure(b), options.delta0);
      row.epsilon_hat = gap.epsilon_hat;
      row.epsilon_se = gap.best_se;
      d2s.push_back(row.sup_d2);
      gs.push_back(row.g);
      s.mean_tightness_statistic += row.tightness_statistic / options.repetitions;
      res.rows.push_back(row);
    }
    s.median_d2 = median(d2s);
    s.median_g = median(gs);
    s.max_g = *std::max_element(gs.begin(), gs.end());
    res.summaries.push_back(s);
    res.gaps.push_back(gap);
  }
  return res;
}

int run_study(const std::string& study, const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  EventLog log(out_dir / "events.jsonl");
  std::vector<std::string> outputs;
  const auto wall_start = std::chrono::system_clock::now();
  const auto start = std::chrono::steady_clock::now();
  int status = 0;
  std::string error;
  Context ctx{cfg, out_dir, log, outputs};
  try {
    if (!cfg.study.empty() && cfg.study != study) {
      throw mfg::InvalidArgument("config key 'study.name': '" + cfg.study + "' does not match the subcommand '" + study +
                                 "'");
    }
    log.emit("info", "study_started", {{"study", study}, {"seed", cfg.seed}, {"config_hash", cfg.hash()}});
    const Benchmark bench = make_benchmark(cfg);
    if (study == "solve-mfg") {
      study_solve_mfg(ctx, bench);
    } else if (study == "simulate-nplayer") {
      study_simulate(ctx, bench);
    } else if (study == "nash-gap") {
      study_nash_gap(ctx, bench);
    } else if (study == "convergence-study") {
      study_convergence(ctx, bench);
    } else if (study == "value-monotonicity") {
      study_monotonicity(ctx, bench);
    } else if (study == "diagnostics") {
      study_diagnostics(ctx, bench);
    } else {
      throw mfg::InvalidArgument("unknown study '" + study + "'");
    }
    log.emit("info", "study_finished", {{"study", study}, {"outputs", outputs}});
  } catch (const mfg::InvalidArgument& e) {
    status = 2;
    error = e.what();
    log.emit("error", "invalid_argument", {{"message", error}});
  } catch (const mfg::NumericError& e) {
    status = 3;
    error = e.what();
    log.emit("error", "numeric_error", {{"message", error}});
  } catch (const std::exception& e) {
    status = 1;
    error = e.what();
    log.emit("error", "failure", {{"message", error}});
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json config = json::object();
  for (const auto& [key, value] : cfg.entries()) config[key] = value;
  json manifest{{"tool", "mfglab"},
                {"version", kVersion},
                {"study", study},
                {"seed", cfg.seed},
                {"config_hash", cfg.hash()},
                {"config", config},
                {"started_at", utc_timestamp(wall_start)},
                {"wall_clock_seconds", wall},
                {"exit_status", status},
                {"outputs", outputs}};
  if (!error.empty()) manifest["error"] = error;
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return status;
}

}  // namespace mfglab
