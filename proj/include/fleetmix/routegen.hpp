#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fleetmix/domain.hpp"

namespace fleetmix {

/// Depot-rooted candidate route. The depot is implicit at both ends; length
/// is the closed-tour distance.
struct Route {
  std::vector<int> sequence;       // demand-node ids, no repeats
  double length = 0.0;             // km
  std::vector<int> feasible_types; // type indices whose driving range covers length

  bool elementary() const { return sequence.size() == 1; }
};

/// Orientation-free canonical form: the lexicographically smaller of the
/// sequence and its reversal.
std::vector<int> canonical_sequence(std::vector<int> seq);

/// Builds a Route from a node sequence: canonicalizes, measures the closed
/// tour and derives the feasible vehicle types.
Route make_route(const Instance& inst, std::vector<int> seq);

double route_length(const Instance& inst, const std::vector<int>& seq);

struct RoutePool {
  std::vector<Route> routes;            // deduplicated, canonical sequences
  std::vector<long> activation_count;   // per route
  std::vector<int> elementary_ids;      // positions of the single-customer routes

  int size() const { return static_cast<int>(routes.size()); }
};

/// Optimal partition of a giant tour into consecutive capacity-feasible
/// segments minimizing total closed-route distance (shortest path on the
/// split DAG). Throws instance_error when a single demand exceeds capacity.
std::vector<Route> split_giant_tour(const std::vector<int>& tour,
                                    const std::vector<double>& demands,
                                    double capacity, const Instance& inst);

struct AlnsParams {
  int iterations = 5000;
  double removal_min_frac = 0.10;
  double removal_max_frac = 0.35;
  double score_new_best = 33.0;
  double score_improving = 9.0;
  double score_accepted = 1.0;
  double weight_smoothing = 0.8;
  int segment_length = 100;
  /// Start temperature calibrated so this relative degradation of the initial
  /// solution is accepted with probability one half.
  double start_degradation = 0.05;
  double cooling = 0.9995;
};

struct AlnsResult {
  std::vector<Route> routes;
  double cost = 0.0;  // total closed-tour distance
};

/// Adaptive large neighborhood search for the capacitated VRP: random, worst
/// and Shaw removal, greedy and 2-regret insertion, adaptive operator weights
/// and simulated-annealing acceptance. Never returns worse than the initial
/// split-tour solution.
AlnsResult alns_cvrp(const Instance& inst, const std::vector<double>& demands,
                     double capacity, int iters, std::uint64_t seed,
                     const AlnsParams& params = {});

struct PoolConfig {
  int pool_size = 200;
  int n_starts = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  AlnsParams alns;
};

/// Runs n_starts ALNS searches per demand realization (every scenario plus
/// the expected vector) and per vehicle capacity, counts canonicalized route
/// activations across best solutions, keeps the pool_size most frequent
/// (ties: shorter first, then lexicographic) and always unions in the
/// elementary routes.
RoutePool build_route_pool(const Instance& inst, const ScenarioSet& scenarios,
                           const PoolConfig& cfg);

}  // namespace fleetmix
