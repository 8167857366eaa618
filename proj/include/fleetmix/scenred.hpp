#pragma once

#include <map>
#include <vector>

#include "fleetmix/domain.hpp"

namespace fleetmix {

/// Result of dropping scenarios and redistributing their probability mass to
/// the nearest retained scenario (Euclidean metric on demand vectors).
struct ReducedTree {
  std::vector<int> kept_ids;       // selection order for FFS, ascending otherwise
  std::vector<double> new_probs;   // aligned with kept_ids
  double distance = 0.0;           // transportation distance to the original tree
  std::map<int, int> assignment;   // deleted scenario -> nearest kept scenario
  std::vector<double> step_costs;  // FFS only: greedy objective after each pick
};

/// Distance of the reduced tree that keeps exactly `kept` and applies the
/// optimal redistribution rule: sum over deleted scenarios of probability
/// times the distance to the nearest kept one (nearest ties break to the
/// lowest kept index).
ReducedTree reduction_distance(const ScenarioSet& scenarios,
                               const std::vector<int>& kept);

/// Fast Forward Selection: greedily adds the scenario that minimizes the
/// resulting reduction distance, k times, candidate ties broken by lowest
/// scenario index.
ReducedTree fast_forward_select(const ScenarioSet& scenarios, int k);

/// Exact value of the underlying transportation LP (marginals on the original
/// probabilities, redistribution probabilities free). Solved with the simplex
/// backend; used as an independent oracle for reduction_distance.
double transport_lp_oracle(const ScenarioSet& scenarios, const std::vector<int>& kept);

/// Materializes the reduced tree as a standalone scenario set.
ScenarioSet apply_reduction(const ScenarioSet& scenarios, const ReducedTree& tree);

}  // namespace fleetmix
