// Exact discrete optimal transport with squared Euclidean cost.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfg/errors.hpp"
#include "mfg/measures.hpp"

namespace mfg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-15;

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double diff = x[c] - y[c];
    s += diff * diff;
  }
  return s;
}

std::vector<std::size_t> sorted_order_1d(const DiscreteMeasure& mu) {
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  const auto x = mu.coords();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  return order;
}

void check_same_dim(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.empty() || nu.empty()) throw InvalidArgument("wasserstein2: empty measure");
  if (mu.dim() != nu.dim()) throw InvalidArgument("wasserstein2: dimension mismatch");
}

bool equal_size_uniform(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return mu.size() == nu.size() && mu.has_uniform_weights() && nu.has_uniform_weights();
}

double plan_cost(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  long double cost = 0.0L;
  for (const auto& e : plan.entries) cost += e.mass * squared_distance(mu.atom(e.source), nu.atom(e.target));
  return static_cast<double>(cost);
}

}  // namespace

std::vector<double> squared_distance_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_dim(mu, nu);
  std::vector<double> cost(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) cost[i * nu.size() + j] = squared_distance(mu.atom(i), nu.atom(j));
  }
  return cost;
}

TransportPlan monotone_plan_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_dim(mu, nu);
  if (mu.dim() != 1) throw InvalidArgument("monotone_plan_1d requires d = 1");
  const auto a = sorted_order_1d(mu);
  const auto b = sorted_order_1d(nu);
  TransportPlan plan;
  plan.entries.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = mu.weight(a[0]);
  double rb = nu.weight(b[0]);
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    if (m > 0.0) plan.entries.push_back({a[i], b[j], m});
    ra -= m;
    rb -= m;
    const bool next_a = ra <= kMassEps;
    const bool next_b = rb <= kMassEps;
    if (next_a && ++i < a.size()) ra = mu.weight(a[i]);
    if (next_b && ++j < b.size()) rb = nu.weight(b[j]);
    if (!next_a && !next_b) break;  // unreachable for valid measures
  }
  plan.cost = plan_cost(plan, mu, nu);
  return plan;
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw InvalidArgument("solve_assignment: cost must be n x n");
  if (n == 0) return {};
  // Shortest augmenting path with potentials (Kuhn-Munkres, O(n^3)); 1-based.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

TransportPlan solve_transport(std::span<const double> cost, std::span<const double> supply,
                              std::span<const double> demand) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  if (n == 0 || m == 0 || cost.size() != n * m) throw InvalidArgument("solve_transport: bad dimensions");
  // Successive shortest paths on the bipartite residual graph with Dijkstra
  // over reduced costs. Sources are nodes [0, n), sinks [n, n + m).
  std::vector<double> flow(n * m, 0.0);
  std::vector<double> rs(supply.begin(), supply.end());
  std::vector<double> rd(demand.begin(), demand.end());
  std::vector<double> pot(n + m, 0.0), dist(n + m);
  std::vector<std::size_t> prev(n + m);
  std::vector<char> done(n + m);
  const std::size_t kNone = std::numeric_limits<std::size_t>::max();

  auto has_supply = [&] { return std::any_of(rs.begin(), rs.end(), [](double s) { return s > kMassEps; }); };
  auto has_demand = [&] { return std::any_of(rd.begin(), rd.end(), [](double s) { return s > kMassEps; }); };

  while (has_supply() && has_demand()) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (rs[i] > kMassEps) dist[i] = 0.0;
    }
    for (;;) {
      std::size_t best = kNone;
      for (std::size_t v = 0; v < n + m; ++v) {
        if (!done[v] && dist[v] < kInf && (best == kNone || dist[v] < dist[best])) best = v;
      }
      if (best == kNone) break;
      done[best] = 1;
      if (best < n) {
        const std::size_t i = best;
        for (std::size_t j = 0; j < m; ++j) {
          const double reduced = std::max(0.0, cost[i * m + j] + pot[i] - pot[n + j]);
          if (dist[i] + reduced < dist[n + j]) {
            dist[n + j] = dist[i] + reduced;
            prev[n + j] = i;
          }
        }
      } else {
        const std::size_t j = best - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (flow[i * m + j] <= kMassEps) continue;
          const double reduced = std::max(0.0, -cost[i * m + j] + pot[n + j] - pot[i]);
          if (dist[best] + reduced < dist[i]) {
            dist[i] = dist[best] + reduced;
            prev[i] = best;
          }
        }
      }
    }
    std::size_t sink = kNone;
    for (std::size_t j = 0; j < m; ++j) {
      if (rd[j] > kMassEps && dist[n + j] < kInf && (sink == kNone || dist[n + j] < dist[n + sink])) sink = j;
    }
    if (sink == kNone) throw NumericError("solve_transport: no augmenting path (unbalanced marginals?)");
    const double reach = dist[n + sink];
    for (std::size_t v = 0; v < n + m; ++v) pot[v] += std::min(dist[v], reach);

    double amount = rd[sink];
    std::size_t v = n + sink;
    while (prev[v] != kNone) {
      const std::size_t u = prev[v];
      if (u >= n) amount = std::min(amount, flow[v * m + (u - n)]);  // backward arc sink u -> source v
      v = u;
    }
    amount = std::min(amount, rs[v]);
    const std::size_t start = v;
    v = n + sink;
    while (prev[v] != kNone) {
      const std::size_t u = prev[v];
      if (u < n) {
        flow[u * m + (v - n)] += amount;
      } else {
        double& f = flow[v * m + (u - n)];
        f -= amount;
        if (f <= kMassEps) f = 0.0;
      }
      v = u;
    }
    rs[start] -= amount;
    if (rs[start] <= kMassEps) rs[start] = 0.0;
    rd[sink] -= amount;
    if (rd[sink] <= kMassEps) rd[sink] = 0.0;
  }

  TransportPlan plan;
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (flow[i * m + j] > 0.0) {
        plan.entries.push_back({i, j, flow[i * m + j]});
        total += flow[i * m + j] * cost[i * m + j];
      }
    }
  }
  plan.cost = static_cast<double>(total);
  return plan;
}

Wasserstein2 wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_dim(mu, nu);
  TransportPlan plan;
  if (mu.dim() == 1) {
    plan = monotone_plan_1d(mu, nu);
  } else if (equal_size_uniform(mu, nu)) {
    const auto assignment = solve_assignment(squared_distance_matrix(mu, nu), mu.size());
    const double w = 1.0 / static_cast<double>(mu.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) plan.entries.push_back({i, assignment[i], w});
    plan.cost = plan_cost(plan, mu, nu);
  } else {
    const auto cost = squared_distance_matrix(mu, nu);
    plan = solve_transport(cost, mu.weights(), nu.weights());
    plan.cost = plan_cost(plan, mu, nu);
  }
  return {std::sqrt(std::max(0.0, plan.cost)), std::move(plan)};
}

double wasserstein2_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_dim(mu, nu);
  if (mu.dim() == 1 && equal_size_uniform(mu, nu)) {
    std::vector<double> a(mu.coords().begin(), mu.coords().end());
    std::vector<double> b(nu.coords().begin(), nu.coords().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(static_cast<double>(s / static_cast<long double>(a.size())));
  }
  return wasserstein2(mu, nu).distance;
}

}  // namespace mfg
