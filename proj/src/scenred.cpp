#include "fleetmix/scenred.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fleetmix/simplex.hpp"

namespace fleetmix {

namespace {

double scen_dist(const ScenarioSet& sc, int a, int b) {
  double acc = 0.0;
  const auto& da = sc.demands[a];
  const auto& db = sc.demands[b];
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

ReducedTree reduction_distance(const ScenarioSet& scenarios,
                               const std::vector<int>& kept) {
  const int S = scenarios.num_scenarios();
  if (kept.empty()) throw instance_error("reduction_distance: kept set is empty");
  std::vector<char> is_kept(S, 0);
  for (int s : kept) {
    if (s < 0 || s >= S) throw instance_error("reduction_distance: index out of range");
    is_kept[s] = 1;
  }
  ReducedTree tree;
  tree.kept_ids = kept;
  tree.new_probs.assign(kept.size(), 0.0);
  for (std::size_t k = 0; k < kept.size(); ++k)
    tree.new_probs[k] = scenarios.probabilities[kept[k]];

  std::vector<int> slot(S, -1);
  for (std::size_t k = 0; k < kept.size(); ++k) slot[kept[k]] = static_cast<int>(k);

  for (int del = 0; del < S; ++del) {
    if (is_kept[del]) continue;
    double best = std::numeric_limits<double>::infinity();
    int nearest = -1;
    for (int s = 0; s < S; ++s) {
      if (!is_kept[s]) continue;
      const double d = scen_dist(scenarios, del, s);
      // strict < keeps the lowest kept index on exact ties
      if (d < best) {
        best = d;
        nearest = s;
      }
    }
    tree.distance += scenarios.probabilities[del] * best;
    tree.assignment[del] = nearest;
    tree.new_probs[slot[nearest]] += scenarios.probabilities[del];
  }
  return tree;
}

ReducedTree fast_forward_select(const ScenarioSet& scenarios, int k) {
  const int S = scenarios.num_scenarios();
  if (k < 1 || k > S)
    throw instance_error("fast_forward_select: k must be within 1..|S|");

  // pairwise distances once; the greedy loop is O(k * S^2)
  std::vector<std::vector<double>> dist(S, std::vector<double>(S, 0.0));
  for (int a = 0; a < S; ++a)
    for (int b = a + 1; b < S; ++b) dist[a][b] = dist[b][a] = scen_dist(scenarios, a, b);

  std::vector<char> selected(S, 0);
  std::vector<double> min_to_sel(S, std::numeric_limits<double>::infinity());
  std::vector<int> picks;
  std::vector<double> step_costs;

  for (int step = 0; step < k; ++step) {
    int best_u = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int u = 0; u < S; ++u) {
      if (selected[u]) continue;
      double cost = 0.0;
      for (int t = 0; t < S; ++t) {
        if (selected[t] || t == u) continue;
        cost += scenarios.probabilities[t] * std::min(min_to_sel[t], dist[t][u]);
      }
      if (cost < best_cost) {  // strict < keeps the lowest index on ties
        best_cost = cost;
        best_u = u;
      }
    }
    selected[best_u] = 1;
    picks.push_back(best_u);
    step_costs.push_back(best_cost);
    for (int t = 0; t < S; ++t)
      min_to_sel[t] = std::min(min_to_sel[t], dist[t][best_u]);
  }

  ReducedTree tree = reduction_distance(scenarios, picks);
  tree.step_costs = std::move(step_costs);
  return tree;
}

double transport_lp_oracle(const ScenarioSet& scenarios, const std::vector<int>& kept) {
  const int S = scenarios.num_scenarios();
  if (kept.empty()) throw instance_error("transport_lp_oracle: kept set is empty");
  const int K = static_cast<int>(kept.size());

  lp::LpProblem p;
  // eta[s][k]: mass moved from scenario s onto kept scenario k
  std::vector<std::vector<int>> eta(S, std::vector<int>(K));
  for (int s = 0; s < S; ++s)
    for (int j = 0; j < K; ++j)
      eta[s][j] = p.add_var(0.0, kInf, scen_dist(scenarios, s, kept[j]));
  // redistribution probabilities are free to be chosen optimally
  std::vector<int> pi_red(K);
  for (int j = 0; j < K; ++j) pi_red[j] = p.add_var(0.0, 1.0, 0.0);

  for (int s = 0; s < S; ++s) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < K; ++j) terms.push_back({eta[s][j], 1.0});
    p.add_row(lp::RowSense::kEq, scenarios.probabilities[s], std::move(terms));
  }
  for (int j = 0; j < K; ++j) {
    std::vector<std::pair<int, double>> terms;
    for (int s = 0; s < S; ++s) terms.push_back({eta[s][j], 1.0});
    terms.push_back({pi_red[j], -1.0});
    p.add_row(lp::RowSense::kEq, 0.0, std::move(terms));
  }
  {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < K; ++j) terms.push_back({pi_red[j], 1.0});
    p.add_row(lp::RowSense::kEq, 1.0, std::move(terms));
  }

  auto res = lp::solve_lp(p);
  if (res.status != lp::LpStatus::kOptimal)
    throw std::runtime_error("transport_lp_oracle: LP did not solve");
  return res.objective;
}

ScenarioSet apply_reduction(const ScenarioSet& scenarios, const ReducedTree& tree) {
  ScenarioSet out;
  for (std::size_t k = 0; k < tree.kept_ids.size(); ++k) {
    out.demands.push_back(scenarios.demands[tree.kept_ids[k]]);
    out.probabilities.push_back(tree.new_probs[k]);
  }
  return out;
}

}  // namespace fleetmix
