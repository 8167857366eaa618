#include "fleetmix/routegen.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <future>
#include <map>
#include <thread>

#include "fleetmix/rng.hpp"

namespace fleetmix {

std::vector<int> canonical_sequence(std::vector<int> seq) {
  std::vector<int> rev(seq.rbegin(), seq.rend());
  return std::min(seq, rev);
}

double route_length(const Instance& inst, const std::vector<int>& seq) {
  if (seq.empty()) return 0.0;
  double len = inst.distance[0][seq.front()];
  for (std::size_t k = 0; k + 1 < seq.size(); ++k)
    len += inst.distance[seq[k]][seq[k + 1]];
  len += inst.distance[seq.back()][0];
  return len;
}

Route make_route(const Instance& inst, std::vector<int> seq) {
  Route r;
  r.sequence = canonical_sequence(std::move(seq));
  r.length = route_length(inst, r.sequence);
  for (int p = 0; p < inst.num_types(); ++p)
    if (r.length <= inst.vehicle_types[p].driving_range) r.feasible_types.push_back(p);
  return r;
}

std::vector<Route> split_giant_tour(const std::vector<int>& tour,
                                    const std::vector<double>& demands,
                                    double capacity, const Instance& inst) {
  const int n = static_cast<int>(tour.size());
  if (n == 0) return {};
  if (capacity <= 0.0) throw instance_error("split_giant_tour: capacity must be > 0");
  for (int c : tour)
    if (demands[c] > capacity)
      throw instance_error("split_giant_tour: demand at node " + std::to_string(c) +
                           " exceeds capacity");

  // shortest path on the segment DAG: best[j] = cheapest cover of tour[0..j)
  const double inf = kInf;
  std::vector<double> best(n + 1, inf);
  std::vector<int> pred(n + 1, -1);
  best[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (best[i] == inf) continue;
    double load = 0.0;
    double inner = 0.0;  // path distance tour[i] .. tour[j-1]
    for (int j = i + 1; j <= n; ++j) {
      load += demands[tour[j - 1]];
      if (load > capacity) break;
      if (j > i + 1) inner += inst.distance[tour[j - 2]][tour[j - 1]];
      const double seg = inst.distance[0][tour[i]] + inner + inst.distance[tour[j - 1]][0];
      if (best[i] + seg < best[j]) {
        best[j] = best[i] + seg;
        pred[j] = i;
      }
    }
  }
  std::vector<Route> routes;
  int j = n;
  while (j > 0) {
    const int i = pred[j];
    routes.push_back(make_route(inst, {tour.begin() + i, tour.begin() + j}));
    j = i;
  }
  std::reverse(routes.begin(), routes.end());
  return routes;
}

namespace {

// Mutable ALNS solution: routes as plain sequences plus cached loads.
struct WorkingSolution {
  std::vector<std::vector<int>> routes;
  std::vector<double> loads;
  double cost = 0.0;
};

double solution_cost(const Instance& inst, const std::vector<std::vector<int>>& routes) {
  double c = 0.0;
  for (const auto& r : routes) c += route_length(inst, r);
  return c;
}

WorkingSolution from_routes(const Instance& inst, const std::vector<double>& demands,
                            const std::vector<Route>& routes) {
  WorkingSolution w;
  for (const auto& r : routes) {
    w.routes.push_back(r.sequence);
    double load = 0.0;
    for (int c : r.sequence) load += demands[c];
    w.loads.push_back(load);
  }
  w.cost = solution_cost(inst, w.routes);
  return w;
}

void drop_empty_routes(WorkingSolution& w) {
  for (std::size_t k = w.routes.size(); k-- > 0;) {
    if (!w.routes[k].empty()) continue;
    w.routes.erase(w.routes.begin() + k);
    w.loads.erase(w.loads.begin() + k);
  }
}

double removal_gain(const Instance& inst, const std::vector<int>& route, int pos) {
  const int n = static_cast<int>(route.size());
  const int prev = pos == 0 ? 0 : route[pos - 1];
  const int next = pos == n - 1 ? 0 : route[pos + 1];
  const int cur = route[pos];
  return inst.distance[prev][cur] + inst.distance[cur][next] - inst.distance[prev][next];
}

void remove_customer(const Instance& inst, WorkingSolution& w, int route_idx, int pos,
                     const std::vector<double>& demands) {
  auto& r = w.routes[route_idx];
  w.cost -= removal_gain(inst, r, pos);
  w.loads[route_idx] -= demands[r[pos]];
  r.erase(r.begin() + pos);
}

struct InsertSpot {
  int route = -1;  // -1 = open a new route
  int pos = 0;
  double delta = kInf;
};

InsertSpot best_insertion(const Instance& inst, const WorkingSolution& w, int customer,
                          double demand, double capacity, InsertSpot* second_best) {
  InsertSpot best, second;
  auto consider = [&](int route, int pos, double delta) {
    if (delta < best.delta) {
      second = best;
      best = InsertSpot{route, pos, delta};
    } else if (delta < second.delta) {
      second = InsertSpot{route, pos, delta};
    }
  };
  for (std::size_t k = 0; k < w.routes.size(); ++k) {
    if (w.loads[k] + demand > capacity + 1e-9) continue;
    const auto& r = w.routes[k];
    const int n = static_cast<int>(r.size());
    for (int pos = 0; pos <= n; ++pos) {
      const int prev = pos == 0 ? 0 : r[pos - 1];
      const int next = pos == n ? 0 : r[pos];
      const double delta = inst.distance[prev][customer] +
                           inst.distance[customer][next] - inst.distance[prev][next];
      consider(static_cast<int>(k), pos, delta);
    }
  }
  consider(-1, 0, 2.0 * inst.distance[0][customer]);  // fresh out-and-back route
  if (second_best) *second_best = second;
  return best;
}

void apply_insertion(const Instance& inst, WorkingSolution& w, int customer,
                     double demand, const InsertSpot& spot) {
  (void)inst;
  if (spot.route < 0) {
    w.routes.push_back({customer});
    w.loads.push_back(demand);
  } else {
    w.routes[spot.route].insert(w.routes[spot.route].begin() + spot.pos, customer);
    w.loads[spot.route] += demand;
  }
  w.cost += spot.delta;
}

}  // namespace

AlnsResult alns_cvrp(const Instance& inst, const std::vector<double>& demands,
                     double capacity, int iters, std::uint64_t seed,
                     const AlnsParams& params) {
  const int n = inst.num_demand_nodes();
  if (iters < 1) throw instance_error("alns_cvrp: iters must be >= 1");
  for (int i = 1; i <= n; ++i)
    if (demands[i] > capacity)
      throw instance_error("alns_cvrp: demand at node " + std::to_string(i) +
                           " exceeds capacity");

  Rng rng(seed);
  std::vector<int> tour(n);
  for (int i = 0; i < n; ++i) tour[i] = i + 1;
  rng.shuffle(tour);
  WorkingSolution cur = from_routes(inst, demands, split_giant_tour(tour, demands, capacity, inst));
  WorkingSolution best = cur;

  if (n == 1 || iters == 1) {
    AlnsResult out;
    for (const auto& r : best.routes) out.routes.push_back(make_route(inst, r));
    out.cost = best.cost;
    return out;
  }

  const int n_destroy = 3, n_repair = 2;
  std::vector<double> dw(n_destroy, 1.0), rw(n_repair, 1.0);
  std::vector<double> dscore(n_destroy, 0.0), rscore(n_repair, 0.0);
  std::vector<int> duse(n_destroy, 0), ruse(n_repair, 0);

  // T0 chosen so that a start_degradation-worse move is accepted w.p. 1/2
  double temp = params.start_degradation * std::max(cur.cost, 1e-6) / std::log(2.0);

  for (int iter = 0; iter < iters; ++iter) {
    const int d_op = static_cast<int>(rng.weighted_index(dw));
    const int r_op = static_cast<int>(rng.weighted_index(rw));
    ++duse[d_op];
    ++ruse[r_op];

    WorkingSolution cand = cur;
    const int q = std::max(1, static_cast<int>(std::round(
                                  rng.uniform(params.removal_min_frac,
                                              params.removal_max_frac) * n)));
    std::vector<int> removed;

    if (d_op == 0) {
      // random removal
      for (int k = 0; k < q; ++k) {
        int total = 0;
        for (const auto& r : cand.routes) total += static_cast<int>(r.size());
        if (total == 0) break;
        int pick = static_cast<int>(rng.next_below(total));
        for (std::size_t ri = 0; ri < cand.routes.size(); ++ri) {
          if (pick >= static_cast<int>(cand.routes[ri].size())) {
            pick -= static_cast<int>(cand.routes[ri].size());
            continue;
          }
          removed.push_back(cand.routes[ri][pick]);
          remove_customer(inst, cand, static_cast<int>(ri), pick, demands);
          break;
        }
      }
    } else if (d_op == 1) {
      // worst removal: repeatedly drop a high-saving customer
      for (int k = 0; k < q; ++k) {
        struct Gain {
          double g;
          int route, pos;
        };
        std::vector<Gain> gains;
        for (std::size_t ri = 0; ri < cand.routes.size(); ++ri)
          for (std::size_t pos = 0; pos < cand.routes[ri].size(); ++pos)
            gains.push_back({removal_gain(inst, cand.routes[ri], static_cast<int>(pos)),
                             static_cast<int>(ri), static_cast<int>(pos)});
        if (gains.empty()) break;
        std::sort(gains.begin(), gains.end(), [](const Gain& a, const Gain& b) {
          return a.g > b.g;
        });
        const double y = rng.next_double();
        const int idx = static_cast<int>(std::pow(y, 3.0) * gains.size());
        const Gain& g = gains[std::min<int>(idx, gains.size() - 1)];
        removed.push_back(cand.routes[g.route][g.pos]);
        remove_customer(inst, cand, g.route, g.pos, demands);
      }
    } else {
      // Shaw removal: spatially related customers around a random pivot
      std::vector<int> present;
      for (const auto& r : cand.routes) present.insert(present.end(), r.begin(), r.end());
      if (!present.empty()) {
        const int pivot = present[rng.next_below(present.size())];
        std::sort(present.begin(), present.end(), [&](int a, int b) {
          if (inst.distance[pivot][a] != inst.distance[pivot][b])
            return inst.distance[pivot][a] < inst.distance[pivot][b];
          return a < b;
        });
        std::vector<int> chosen;
        for (int c : present) {
          if (static_cast<int>(chosen.size()) >= q) break;
          // bias toward the most related but keep some randomness
          if (rng.next_double() < 0.75 || static_cast<int>(present.size()) <= q)
            chosen.push_back(c);
        }
        for (int c : chosen) {
          for (std::size_t ri = 0; ri < cand.routes.size(); ++ri) {
            auto& r = cand.routes[ri];
            auto it = std::find(r.begin(), r.end(), c);
            if (it == r.end()) continue;
            removed.push_back(c);
            remove_customer(inst, cand, static_cast<int>(ri),
                            static_cast<int>(it - r.begin()), demands);
            break;
          }
        }
      }
    }
    drop_empty_routes(cand);

    if (r_op == 0) {
      // greedy insertion: always place the globally cheapest pending customer
      std::vector<int> pending = removed;
      while (!pending.empty()) {
        int best_c = -1;
        std::size_t best_k = 0;
        InsertSpot best_spot;
        for (std::size_t k = 0; k < pending.size(); ++k) {
          const int c = pending[k];
          InsertSpot s = best_insertion(inst, cand, c, demands[c], capacity, nullptr);
          if (s.delta < best_spot.delta) {
            best_spot = s;
            best_c = c;
            best_k = k;
          }
        }
        apply_insertion(inst, cand, best_c, demands[best_c], best_spot);
        pending.erase(pending.begin() + best_k);
      }
    } else {
      // 2-regret insertion
      std::vector<int> pending = removed;
      while (!pending.empty()) {
        int best_c = -1;
        std::size_t best_k = 0;
        InsertSpot best_spot;
        double best_regret = -1.0;
        for (std::size_t k = 0; k < pending.size(); ++k) {
          const int c = pending[k];
          InsertSpot second;
          InsertSpot s = best_insertion(inst, cand, c, demands[c], capacity, &second);
          const double regret =
              (second.delta == kInf ? 1e9 : second.delta - s.delta);
          if (regret > best_regret) {
            best_regret = regret;
            best_spot = s;
            best_c = c;
            best_k = k;
          }
        }
        apply_insertion(inst, cand, best_c, demands[best_c], best_spot);
        pending.erase(pending.begin() + best_k);
      }
    }
    drop_empty_routes(cand);

    // acceptance and operator scoring
    double gained = 0.0;
    const bool improved_cur = cand.cost < cur.cost - 1e-12;
    const bool new_best = cand.cost < best.cost - 1e-12;
    bool accept = improved_cur;
    if (!accept) {
      const double delta = cand.cost - cur.cost;
      accept = rng.next_double() < std::exp(-delta / std::max(temp, 1e-12));
    }
    if (new_best)
      gained = params.score_new_best;
    else if (improved_cur)
      gained = params.score_improving;
    else if (accept)
      gained = params.score_accepted;
    dscore[d_op] += gained;
    rscore[r_op] += gained;
    if (accept) cur = std::move(cand);
    if (cur.cost < best.cost - 1e-12) best = cur;

    temp *= params.cooling;
    if ((iter + 1) % params.segment_length == 0) {
      for (int k = 0; k < n_destroy; ++k) {
        if (duse[k] > 0)
          dw[k] = params.weight_smoothing * dw[k] +
                  (1.0 - params.weight_smoothing) * (dscore[k] / duse[k]);
        dscore[k] = 0.0;
        duse[k] = 0;
      }
      for (int k = 0; k < n_repair; ++k) {
        if (ruse[k] > 0)
          rw[k] = params.weight_smoothing * rw[k] +
                  (1.0 - params.weight_smoothing) * (rscore[k] / ruse[k]);
        rscore[k] = 0.0;
        ruse[k] = 0;
      }
    }
  }

  AlnsResult out;
  for (const auto& r : best.routes) out.routes.push_back(make_route(inst, r));
  std::sort(out.routes.begin(), out.routes.end(),
            [](const Route& a, const Route& b) { return a.sequence < b.sequence; });
  out.cost = best.cost;
  return out;
}

RoutePool build_route_pool(const Instance& inst, const ScenarioSet& scenarios,
                           const PoolConfig& cfg) {
  const int n = inst.num_demand_nodes();
  if (cfg.pool_size < n)
    throw instance_error("build_route_pool: pool_size must cover the elementary routes");

  std::vector<std::vector<double>> demand_vectors = scenarios.demands;
  demand_vectors.push_back(scenarios.expected_demand());

  struct Task {
    std::vector<double> demands;  // clamped to the capacity under test
    double capacity;
    std::uint64_t stream;
  };
  std::vector<Task> tasks;
  std::uint64_t stream = 0;
  for (const auto& dv : demand_vectors) {
    for (int p = 0; p < inst.num_types(); ++p) {
      const double cap = inst.vehicle_types[p].capacity;
      Task t;
      t.demands = dv;
      // a node larger than this capacity can still be partially served in the
      // models; clamp so the route-shape search stays feasible
      for (double& d : t.demands) d = std::min(d, cap);
      t.capacity = cap;
      for (int start = 0; start < cfg.n_starts; ++start) {
        t.stream = stream++;
        tasks.push_back(t);
      }
    }
  }

  std::vector<AlnsResult> results(tasks.size());
  const int workers = std::max(1, cfg.threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      results[k] = alns_cvrp(inst, tasks[k].demands, tasks[k].capacity,
                             cfg.alns.iterations,
                             Rng::substream(cfg.seed, tasks[k].stream).next_u64(),
                             cfg.alns);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // deterministic sequential merge
  std::map<std::vector<int>, long> counts;
  for (const auto& res : results)
    for (const auto& r : res.routes) ++counts[r.sequence];

  struct Cand {
    std::vector<int> seq;
    double length;
    long count;
  };
  std::vector<Cand> cands;
  for (const auto& [seq, count] : counts)
    cands.push_back({seq, route_length(inst, seq), count});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.length != b.length) return a.length < b.length;
    return a.seq < b.seq;
  });

  RoutePool pool;
  std::map<std::vector<int>, int> placed;
  for (const auto& c : cands) {
    if (pool.size() >= cfg.pool_size) break;
    placed[c.seq] = pool.size();
    pool.routes.push_back(make_route(inst, c.seq));
    pool.activation_count.push_back(c.count);
  }
  // the elementary routes are always present
  for (int i = 1; i <= n; ++i) {
    const std::vector<int> seq{i};
    auto it = placed.find(seq);
    if (it == placed.end()) {
      placed[seq] = pool.size();
      pool.routes.push_back(make_route(inst, seq));
      auto cit = counts.find(seq);
      pool.activation_count.push_back(cit == counts.end() ? 0 : cit->second);
    }
    pool.elementary_ids.push_back(placed[seq]);
  }
  return pool;
}

}  // namespace fleetmix
