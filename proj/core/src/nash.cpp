#include "mfg/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfg/errors.hpp"

namespace mfg {
namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

const std::vector<double>& initials_for(const std::vector<std::vector<double>>& initials, std::size_t r,
                                        std::size_t reps) {
  if (initials.size() == 1) return initials.front();
  if (initials.size() != reps) throw InvalidArgument("need one initial set, or one per repetition");
  return initials[r];
}

void mean_se(std::span<const double> x, double& mean, double& se) {
  const double n = static_cast<double>(x.size());
  mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  if (x.size() < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  se = std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

std::vector<double> realized_costs(const ModelSpec& model, const PathBundle& bundle) {
  const std::size_t N = bundle.players;
  const int J = bundle.grid.slots();
  const double dt = bundle.grid.step();
  std::vector<double> cost(N, 0.0);
  for (int j = 0; j < J; ++j) {
    const DiscreteMeasure& mu = bundle.flow.at(static_cast<std::size_t>(j));
    const double t = bundle.grid.time(j);
    for (std::size_t i = 0; i < N; ++i) cost[i] += model.running_cost(t, bundle.state(j, i), mu, bundle.control(j, i)) * dt;
  }
  const DiscreteMeasure& muT = bundle.flow.at(static_cast<std::size_t>(J));
  for (std::size_t i = 0; i < N; ++i) cost[i] += model.terminal_cost(bundle.state(J, i), muT);
  return cost;
}

CostReport cost_report(const ModelSpec& model, std::span<const PathBundle> bundles) {
  if (bundles.empty()) throw InvalidArgument("cost_report needs at least one repetition");
  const std::size_t N = bundles.front().players;
  const std::size_t R = bundles.size();
  CostReport rep;
  rep.players = N;
  rep.repetitions = static_cast<int>(R);
  rep.samples.resize(R * N);
  for (std::size_t r = 0; r < R; ++r) {
    if (bundles[r].players != N) throw InvalidArgument("repetitions must have the same player count");
    const auto c = realized_costs(model, bundles[r]);
    std::copy(c.begin(), c.end(), rep.samples.begin() + static_cast<std::ptrdiff_t>(r * N));
  }
  rep.mean.resize(N);
  rep.se.resize(N);
  std::vector<double> col(R);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t r = 0; r < R; ++r) col[r] = rep.samples[r * N + i];
    mean_se(col, rep.mean[i], rep.se[i]);
  }
  rep.mean_cost = std::accumulate(rep.mean.begin(), rep.mean.end(), 0.0) / static_cast<double>(N);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rep.mean[a] < rep.mean[b]; });
  rep.designated = order[(N - 1) / 2];
  for (double m : rep.mean) rep.spread = std::max(rep.spread, std::fabs(m - rep.mean_cost));
  return rep;
}

CostReport evaluate_costs(const ModelSpec& model, const StrategyProfile& profile,
                          const std::vector<std::vector<double>>& initials, std::span<const std::uint64_t> seeds,
                          int steps) {
  if (seeds.empty()) throw InvalidArgument("evaluate_costs needs at least one repetition");
  const std::size_t R = seeds.size();
  std::vector<PathBundle> bundles;
  bundles.reserve(R);
  for (std::size_t r = 0; r < R; ++r) {
    bundles.push_back(simulate_n_player(model, profile, initials_for(initials, r, R), seeds[r], steps));
  }
  return cost_report(model, bundles);
}

DeviationResult deviation_gap(const ModelSpec& model, const StrategyProfile& profile, std::size_t player,
                              const std::vector<StrategyPtr>& candidates,
                              const std::vector<std::vector<double>>& initials, std::span<const std::uint64_t> seeds,
                              int steps) {
  const std::size_t players[] = {player};
  return deviation_gap(model, profile, players, candidates, initials, seeds, steps);
}

DeviationResult deviation_gap(const ModelSpec& model, const StrategyProfile& profile,
                              std::span<const std::size_t> players, const std::vector<StrategyPtr>& candidates,
                              const std::vector<std::vector<double>>& initials, std::span<const std::uint64_t> seeds,
                              int steps) {
  if (candidates.empty()) throw InvalidArgument("deviation_gap needs at least one candidate");
  if (seeds.empty()) throw InvalidArgument("deviation_gap needs at least one repetition");
  if (players.empty()) throw InvalidArgument("deviation_gap needs at least one deviating player");
  for (std::size_t i : players) {
    if (i >= profile.size()) throw InvalidArgument("deviating player index out of range");
  }
  for (const auto& c : candidates) {
    if (!c || !c->narrow()) throw InvalidArgument("deviation candidates must be narrow strategies");
  }
  const std::size_t R = seeds.size();
  const auto D = static_cast<double>(players.size());
  DeviationResult res;
  res.players.assign(players.begin(), players.end());
  res.incumbent_samples.assign(R, 0.0);
  std::vector<double> incumbent(R * players.size());
  for (std::size_t r = 0; r < R; ++r) {
    const PathBundle b = simulate_n_player(model, profile, initials_for(initials, r, R), seeds[r], steps);
    const auto costs = realized_costs(model, b);
    for (std::size_t p = 0; p < players.size(); ++p) {
      incumbent[r * players.size() + p] = costs[players[p]];
      res.incumbent_samples[r] += costs[players[p]] / D;
    }
  }
  double se_unused = 0.0;
  mean_se(res.incumbent_samples, res.incumbent_cost, se_unused);
  StrategyProfile deviated = profile;
  std::vector<double> dev_cost(R);
  double best_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    CandidateGap g;
    g.gains.assign(R, 0.0);
    std::fill(dev_cost.begin(), dev_cost.end(), 0.0);
    for (std::size_t p = 0; p < players.size(); ++p) {
      deviated[players[p]] = candidates[c];
      for (std::size_t r = 0; r < R; ++r) {
        const PathBundle b = simulate_n_player(model, deviated, initials_for(initials, r, R), seeds[r], steps);
        const double cost = realized_costs(model, b)[players[p]];
        dev_cost[r] += cost / D;
        g.gains[r] += (incumbent[r * players.size() + p] - cost) / D;
      }
      deviated[players[p]] = profile[players[p]];
    }
    mean_se(g.gains, g.mean_gain, g.se);
    mean_se(dev_cost, g.mean_cost, se_unused);
    res.candidates.push_back(g);
    if (g.mean_gain > best_gain) {
      best_gain = g.mean_gain;
      res.best_candidate = c;
      res.best_se = g.se;
    }
  }
  res.epsilon_hat = std::max(0.0, best_gain);
  return res;
}

StrategyProfile iid_profile(const StrategyPtr& psi, std::size_t N) {
  if (!psi) throw InvalidArgument("iid_profile needs a strategy");
  return StrategyProfile(N, psi);
}

DiscreteMeasure OccupationMeasure::state_marginal(int j) const {
  const auto dd = static_cast<std::size_t>(d);
  std::vector<double> pts;
  pts.reserve(triples.size() * dd);
  for (const auto& tr : triples) {
    const auto* p = tr.states.data() + static_cast<std::size_t>(j) * dd;
    pts.insert(pts.end(), p, p + dd);
  }
  return empirical_measure(d, pts);
}

OccupationMeasure occupation_measure(const PathBundle& bundle) {
  OccupationMeasure q;
  q.grid = bundle.grid;
  q.d = bundle.d;
  q.triples.reserve(bundle.players);
  for (std::size_t i = 0; i < bundle.players; ++i) {
    q.triples.push_back({bundle.state_path(i), lift(bundle.control_path(i)), bundle.noise(i)});
  }
  return q;
}

double tightness_alpha(double delta0) { return delta0 / (2.0 * (8.0 + delta0)); }

double tightness_diagnostic(const OccupationMeasure& Q, double delta0) {
  return tightness_diagnostic(Q, delta0, tightness_alpha(delta0));
}

double tightness_diagnostic(const OccupationMeasure& Q, double delta0, double alpha) {
  const double T = Q.grid.horizon();
  if (!(delta0 > 0.0) || delta0 > std::min(1.0, T)) throw InvalidArgument("delta0 must lie in (0, min(1, T)]");
  if (Q.triples.empty()) throw InvalidArgument("occupation measure is empty");
  const int J = Q.grid.slots();
  const double dt = Q.grid.step();
  const auto d = static_cast<std::size_t>(Q.d);
  const double p = 2.0 + delta0;
  const int max_lag = std::max(1, static_cast<int>(std::floor(std::min(1.0, T) / dt * (1.0 + 1e-12))));
  long double total = 0.0L;
  for (const auto& tr : Q.triples) {
    const auto d1 = static_cast<std::size_t>(tr.noise.dim());
    double sup = 0.0;
    for (int j = 0; j <= J; ++j) {
      sup = std::max(sup, norm2(std::span<const double>(tr.states.data() + static_cast<std::size_t>(j) * d, d)));
    }
    double term = std::pow(std::sqrt(sup), p);
    term += std::sqrt(norm2(tr.noise.at(0)));
    term += tr.control.moment(p);
    // Running maxima of path increments over lags 1..max_lag.
    double wx = 0.0;
    double ww = 0.0;
    double best = 0.0;
    for (int m = 1; m <= std::min(max_lag, J); ++m) {
      for (int j = 0; j + m <= J; ++j) {
        double sx = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = tr.states[static_cast<std::size_t>(j + m) * d + c] - tr.states[static_cast<std::size_t>(j) * d + c];
          sx += diff * diff;
        }
        wx = std::max(wx, std::sqrt(sx));
        double sw = 0.0;
        const auto a = tr.noise.at(j + m);
        const auto b = tr.noise.at(j);
        for (std::size_t c = 0; c < d1; ++c) sw += (a[c] - b[c]) * (a[c] - b[c]);
        ww = std::max(ww, std::sqrt(sw));
      }
      const double h = m * dt;
      best = std::max(best, std::pow(h, -alpha) * (wx + ww));
    }
    total += term + best;
  }
  return static_cast<double>(total / static_cast<long double>(Q.triples.size()));
}

ConditionReport condition_statistics(const PathBundle& bundle, double delta0) {
  if (!(delta0 > 0.0) || delta0 > std::min(1.0, bundle.grid.horizon())) {
    throw InvalidArgument("delta0 must lie in (0, min(1, T)]");
  }
  const double p = 2.0 + delta0;
  const auto d = static_cast<std::size_t>(bundle.d);
  const double dt = bundle.grid.step();
  long double total = 0.0L;
  for (std::size_t i = 0; i < bundle.players; ++i) {
    double s = std::pow(std::sqrt(norm2(std::span<const double>(bundle.initials.data() + i * d, d))), p);
    for (int j = 0; j < bundle.grid.slots(); ++j) s += std::pow(std::sqrt(norm2(bundle.control(j, i))), p) * dt;
    total += s;
  }
  ConditionReport rep;
  rep.tightness_statistic = static_cast<double>(total / static_cast<long double>(bundle.players));
  return rep;
}

ConditionReport condition_statistics(const PathBundle& bundle, double delta0, const CostReport& costs) {
  ConditionReport rep = condition_statistics(bundle, delta0);
  rep.has_costs = true;
  rep.designated = costs.designated;
  rep.designated_cost = costs.mean.empty() ? 0.0 : costs.mean[costs.designated];
  rep.mean_cost = costs.mean_cost;
  rep.spread = costs.spread;
  return rep;
}

CouplingResult optimal_coupling(std::span<const double> sample, const DiscreteMeasure& target,
                                std::span<const double> theta) {
  const int dim = target.dim();
  const auto d = static_cast<std::size_t>(dim);
  if (sample.empty() || sample.size() % d != 0) throw InvalidArgument("optimal_coupling: bad sample size");
  const std::size_t N = sample.size() / d;
  if (theta.size() != N) throw InvalidArgument("optimal_coupling: need one theta per sample point");
  const DiscreteMeasure source = empirical_measure(dim, sample);
  CouplingResult res;
  res.coupled.resize(N * d);
  if (dim == 1) {
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (sample[a] != sample[b]) return sample[a] < sample[b];
      if (theta[a] != theta[b]) return theta[a] < theta[b];
      return a < b;
    });
    std::vector<std::size_t> tgt(target.size());
    std::iota(tgt.begin(), tgt.end(), 0);
    std::stable_sort(tgt.begin(), tgt.end(), [&](std::size_t a, std::size_t b) { return target.atom(a)[0] < target.atom(b)[0]; });
    std::vector<long double> cumulative(tgt.size());
    long double acc = 0.0L;
    for (std::size_t k = 0; k < tgt.size(); ++k) cumulative[k] = acc += target.weight(tgt[k]);
    for (std::size_t rank = 0; rank < N; ++rank) {
      const std::size_t i = order[rank];
      const long double u = (static_cast<long double>(rank) + theta[i]) / static_cast<long double>(N);
      const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), tgt.size() - 1);
      res.coupled[i] = target.atom(tgt[k])[0];
    }
    res.plan = monotone_plan_1d(source, target);
  } else {
    if (target.size() != N || !target.has_uniform_weights()) {
      throw InvalidArgument("optimal_coupling in d > 1 needs a uniform target with one atom per sample point");
    }
    const auto cost = squared_distance_matrix(source, target);
    const auto assign = solve_assignment(cost, N);
    for (std::size_t i = 0; i < N; ++i) {
      const auto a = target.atom(assign[i]);
      std::copy(a.begin(), a.end(), res.coupled.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    res.plan.entries.clear();
    double c = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      res.plan.entries.push_back({i, assign[i], 1.0 / static_cast<double>(N)});
      c += cost[i * N + assign[i]] / static_cast<double>(N);
    }
    res.plan.cost = c;
  }
  res.cost = res.plan.cost;
  double realized = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = sample[i * d + c] - res.coupled[i * d + c];
      s += diff * diff;
    }
    realized += s;
  }
  res.realized_cost = realized / static_cast<double>(N);
  return res;
}

}  // namespace mfg
