// Test-only brute-force oracles. Everything here enumerates independently of
// the production model builders and heuristics; only the bare simplex is
// shared, and solely as a sub-solver for tiny recourse LPs.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "fleetmix/domain.hpp"
#include "fleetmix/simplex.hpp"

namespace oracles {

using fleetmix::CostParams;
using fleetmix::Instance;
using fleetmix::Neighborhoods;
using fleetmix::ScenarioSet;

constexpr double kBig = std::numeric_limits<double>::infinity();

/// Cheapest closed route through every node of `subset` (bitmask over demand
/// nodes, bit i-1 = node i), by Held-Karp. Returns +inf for the empty set.
inline std::vector<double> best_route_costs(const Instance& inst) {
  const int n = inst.num_demand_nodes();
  const int full = 1 << n;
  std::vector<std::vector<double>> dp(full, std::vector<double>(n, kBig));
  for (int i = 0; i < n; ++i) dp[1 << i][i] = inst.distance[0][i + 1];
  for (int mask = 1; mask < full; ++mask)
    for (int last = 0; last < n; ++last) {
      if (dp[mask][last] == kBig || !(mask & (1 << last))) continue;
      for (int nxt = 0; nxt < n; ++nxt) {
        if (mask & (1 << nxt)) continue;
        const int m2 = mask | (1 << nxt);
        const double c = dp[mask][last] + inst.distance[last + 1][nxt + 1];
        if (c < dp[m2][nxt]) dp[m2][nxt] = c;
      }
    }
  std::vector<double> best(full, kBig);
  for (int mask = 1; mask < full; ++mask)
    for (int last = 0; last < n; ++last)
      if (dp[mask][last] < kBig)
        best[mask] = std::min(best[mask], dp[mask][last] + inst.distance[last + 1][0]);
  return best;
}

/// Exact CVRP optimum (total distance, every node served, loads within
/// capacity) by dynamic programming over node subsets. n <= ~12.
inline double exhaustive_cvrp(const Instance& inst, const std::vector<double>& demands,
                              double capacity) {
  const int n = inst.num_demand_nodes();
  const int full = 1 << n;
  const auto route_cost = best_route_costs(inst);
  std::vector<double> load(full, 0.0);
  for (int mask = 1; mask < full; ++mask) {
    const int low = mask & -mask;
    int i = 0;
    while (!(low & (1 << i))) ++i;
    load[mask] = load[mask ^ low] + demands[i + 1];
  }
  std::vector<double> dp(full, kBig);
  dp[0] = 0.0;
  for (int mask = 1; mask < full; ++mask) {
    const int low = mask & -mask;
    for (int sub = mask; sub; sub = (sub - 1) & mask) {
      if (!(sub & low)) continue;  // the lowest node fixes the block
      if (load[sub] > capacity + 1e-9) continue;
      if (dp[mask ^ sub] == kBig || route_cost[sub] == kBig) continue;
      dp[mask] = std::min(dp[mask], dp[mask ^ sub] + route_cost[sub]);
    }
  }
  return dp[full - 1];
}

/// Brute force over every consecutive segmentation of a giant tour.
inline double exhaustive_split_cost(const std::vector<int>& tour,
                                    const std::vector<double>& demands,
                                    double capacity, const Instance& inst) {
  const int n = static_cast<int>(tour.size());
  double best = kBig;
  for (int cuts = 0; cuts < (1 << (n - 1)); ++cuts) {
    double total = 0.0;
    bool ok = true;
    int start = 0;
    for (int pos = 0; pos < n && ok; ++pos) {
      const bool boundary = pos == n - 1 || (cuts & (1 << pos));
      if (!boundary) continue;
      double load = 0.0;
      double len = inst.distance[0][tour[start]];
      for (int k = start; k <= pos; ++k) {
        load += demands[tour[k]];
        if (k > start) len += inst.distance[tour[k - 1]][tour[k]];
      }
      len += inst.distance[tour[pos]][0];
      if (load > capacity + 1e-9) ok = false;
      total += len;
      start = pos + 1;
    }
    if (ok) best = std::min(best, total);
  }
  return best;
}

struct OracleRoute {
  std::vector<int> seq;
  int type;
};

/// Second-stage optimum for a fixed route structure in one scenario:
/// fractional service from on-route origins to reachable targets, unserved
/// shares at gamma, per-route capacity and duration rows.
inline double oracle_recourse_cost(const std::vector<OracleRoute>& routes,
                                   const Instance& inst, const ScenarioSet& scen,
                                   const Neighborhoods& nb, const CostParams& costs,
                                   int s) {
  namespace lp = fleetmix::lp;
  const int n = inst.num_nodes();
  lp::LpProblem p;
  struct Y {
    int route, i, j, var;
  };
  std::vector<Y> ys;
  for (std::size_t k = 0; k < routes.size(); ++k)
    for (int i : routes[k].seq)
      for (int j : nb.out_sets[i])
        ys.push_back({static_cast<int>(k), i, j,
                      p.add_var(0.0, 1.0, recourse_arc_cost(inst, costs, i, j))});
  std::vector<int> wv(n, -1);
  for (int j = 1; j < n; ++j)
    wv[j] = p.add_var(0.0, 1.0, costs.gamma * scen.demands[s][j]);

  for (int j = 1; j < n; ++j) {
    std::vector<std::pair<int, double>> terms{{wv[j], 1.0}};
    for (const auto& y : ys)
      if (y.j == j) terms.push_back({y.var, 1.0});
    p.add_row(lp::RowSense::kEq, 1.0, std::move(terms));
  }
  for (std::size_t k = 0; k < routes.size(); ++k) {
    std::vector<std::pair<int, double>> capt, timet;
    for (const auto& y : ys) {
      if (y.route != static_cast<int>(k)) continue;
      capt.push_back({y.var, scen.demands[s][y.j]});
      if (y.i != y.j)
        timet.push_back({y.var, inst.service_time[y.j] +
                                    costs.beta *
                                        inst.travel_time[routes[k].type][y.i][y.j]});
    }
    p.add_row(lp::RowSense::kLe, inst.vehicle_types[routes[k].type].capacity, capt);
    double len = inst.distance[0][routes[k].seq.front()];
    for (std::size_t q = 0; q + 1 < routes[k].seq.size(); ++q)
      len += inst.distance[routes[k].seq[q]][routes[k].seq[q + 1]];
    len += inst.distance[routes[k].seq.back()][0];
    p.add_row(lp::RowSense::kLe,
              inst.shift_limit - len / inst.vehicle_types[routes[k].type].speed,
              std::move(timet));
  }
  auto res = lp::solve_lp(p);
  if (res.status != lp::LpStatus::kOptimal) return kBig;  // time-infeasible structure
  return res.objective;
}

/// Exhaustive optimum of the whole two-stage problem for tiny instances:
/// enumerates every set of node-disjoint ordered routes over every subset of
/// demand nodes and every vehicle-type assignment, pricing the second stage
/// with oracle_recourse_cost. Intended for n <= 5.
inline double exhaustive_plan_opt(const Instance& inst, const ScenarioSet& scen,
                                  const Neighborhoods& nb, const CostParams& costs,
                                  std::vector<OracleRoute>* best_routes = nullptr) {
  const int n = inst.num_demand_nodes();
  double best = kBig;
  std::vector<OracleRoute> routes;
  std::vector<int> remaining;
  for (int i = 1; i <= n; ++i) remaining.push_back(i);

  auto evaluate = [&]() {
    double first_stage = 0.0;
    for (const auto& r : routes) {
      const auto& vt = inst.vehicle_types[r.type];
      double len = inst.distance[0][r.seq.front()];
      for (std::size_t q = 0; q + 1 < r.seq.size(); ++q)
        len += inst.distance[r.seq[q]][r.seq[q + 1]];
      len += inst.distance[r.seq.back()][0];
      if (len > vt.driving_range + 1e-12) return;          // range-infeasible
      if (len / vt.speed > inst.shift_limit + 1e-12) return;  // bare time infeasible
      first_stage += vt.fixed_cost + vt.unit_distance_cost * len;
    }
    if (first_stage >= best) return;
    double total = first_stage;
    for (int s = 0; s < scen.num_scenarios(); ++s) {
      total += scen.probabilities[s] *
               oracle_recourse_cost(routes, inst, scen, nb, costs, s);
      if (total >= best) return;
    }
    if (total < best) {
      best = total;
      if (best_routes) *best_routes = routes;
    }
  };

  // every assignment of vehicle types to the current structure
  std::function<void(std::size_t)> assign_types = [&](std::size_t k) {
    if (k == routes.size()) {
      evaluate();
      return;
    }
    for (int p = 0; p < inst.num_types(); ++p) {
      routes[k].type = p;
      assign_types(k + 1);
    }
  };

  // recursive structure enumeration: the lowest unrouted node is either left
  // off every route or starts a new route drawn from the remaining nodes
  std::function<void()> build = [&]() {
    if (remaining.empty()) {
      if (routes.empty()) {
        evaluate();
      } else {
        assign_types(0);
      }
      return;
    }
    const int anchor = remaining.front();

    // option 1: anchor stays off-route
    std::vector<int> rest(remaining.begin() + 1, remaining.end());
    std::swap(remaining, rest);
    build();
    std::swap(remaining, rest);

    // option 2: anchor joins a new route with any subset of the others
    std::vector<int> others(remaining.begin() + 1, remaining.end());
    const int m = static_cast<int>(others.size());
    for (int mask = 0; mask < (1 << m); ++mask) {
      std::vector<int> members{anchor};
      std::vector<int> left;
      for (int b = 0; b < m; ++b)
        (mask & (1 << b)) ? members.push_back(others[b]) : left.push_back(others[b]);
      std::sort(members.begin(), members.end());
      // canonical orientation: first element smaller than last
      do {
        if (members.size() > 1 && members.front() > members.back()) continue;
        routes.push_back({members, 0});
        std::swap(remaining, left);
        build();
        std::swap(remaining, left);
        routes.pop_back();
      } while (std::next_permutation(members.begin(), members.end()));
    }
  };
  build();
  return best;
}

}  // namespace oracles
