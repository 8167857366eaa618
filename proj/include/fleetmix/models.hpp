#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "fleetmix/domain.hpp"
#include "fleetmix/mip.hpp"
#include "fleetmix/routegen.hpp"

namespace fleetmix {

struct decode_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlanRoute {
  Route route;
  int type = -1;  // vehicle type index
};

struct RecourseAction {
  int origin = 0;
  int target = 0;
  double fraction = 0.0;
};

struct PlanCosts {
  double fixed = 0.0;              // ownership costs of the selected fleet
  double travel = 0.0;             // distance costs of the consistent routes
  double expected_recourse = 0.0;
  double expected_penalty = 0.0;
  double total = 0.0;
};

/// Decoded first-stage plan plus per-scenario recourse.
struct PlanSolution {
  std::vector<int> fleet;  // per-type vehicle counts
  std::vector<PlanRoute> routes;
  std::vector<std::vector<RecourseAction>> recourse;  // [scenario]
  std::vector<std::vector<double>> unserved;          // [scenario][node]
  std::vector<std::vector<double>> route_loads;       // [scenario][plan route]
  std::vector<std::vector<double>> route_times;       // [scenario][plan route]
  PlanCosts costs;
  double objective = 0.0;
};

/// Node-based formulation: arc binaries with load/time accumulation.
struct NodeModel {
  MipModel mip;
  int N = 0, P = 0, S = 0;
  std::vector<std::vector<int>> z, v;             // [i][p], demand nodes only
  std::vector<std::vector<std::vector<int>>> x;   // [p][i][j], -1 when absent
  std::vector<std::vector<std::vector<int>>> y;   // [s][i][j], -1 outside the neighborhood
  std::vector<std::vector<int>> w, u, tau;        // [s][i]
};

/// Path-based formulation over a preprocessed route pool.
struct PathModel {
  MipModel mip;
  RoutePool pool;
  int P = 0, S = 0;
  std::vector<std::vector<int>> psi;  // [r][p], -1 when the type cannot run r
  // per scenario and route: (origin, target, variable)
  std::vector<std::vector<std::vector<std::tuple<int, int, int>>>> y;
  std::vector<std::vector<int>> w;  // [s][j]
};

/// Emits the full node formulation; with_valid_ineq adds the per-scenario
/// fleet-capacity inequality.
NodeModel build_node_model(const Instance& inst, const ScenarioSet& scen,
                           const Neighborhoods& nb, const CostParams& costs,
                           bool with_valid_ineq = true);

/// Emits the path formulation; the pool must contain every elementary route.
PathModel build_path_model(const Instance& inst, const ScenarioSet& scen,
                           const Neighborhoods& nb, const CostParams& costs,
                           const RoutePool& pool);

enum class MeasureVariant { kFixFirstStage, kFixFleet, kLbFirstStage, kLbFleet };

/// Pins (or lower-bounds) first-stage decisions to a reference plan:
/// kFixFirstStage / kLbFirstStage act on every first-stage binary,
/// kFixFleet / kLbFleet only on the per-type fleet counts.
void apply_measure_variant(NodeModel& model, MeasureVariant variant,
                           const PlanSolution& reference);
void apply_measure_variant(PathModel& model, MeasureVariant variant,
                           const PlanSolution& reference);

/// Reconstructs routes from the solved binaries, copies the recourse
/// variables and recomputes all costs from first principles (reconciled with
/// the solver objective to 1e-5 relative; decode_error on inconsistency).
PlanSolution decode_solution(const NodeModel& model, const MipSolution& raw,
                             const Instance& inst, const ScenarioSet& scen,
                             const CostParams& costs);
PlanSolution decode_solution(const PathModel& model, const MipSolution& raw,
                             const Instance& inst, const ScenarioSet& scen,
                             const CostParams& costs);

struct RecourseResult {
  std::vector<RecourseAction> actions;
  std::vector<double> unserved;     // per node
  std::vector<double> route_loads;  // per plan route
  std::vector<double> route_times;
  double cost = 0.0;  // recourse + penalty cost in this scenario
};

/// Per-scenario second stage with the first-stage routes held fixed: a linear
/// program in the service fractions and unserved shares. Always feasible
/// (full outsourcing is a fallback).
RecourseResult evaluate_recourse(const PlanSolution& first_stage, const Instance& inst,
                                 const ScenarioSet& scen, const Neighborhoods& nb,
                                 const CostParams& costs, int scenario_id);

/// Validates every PlanSolution invariant (coverage identity, per-route
/// capacity and time, unserved in [0,1], nodes on at most one route).
/// Returns a human-readable violation description, empty when clean.
std::string check_plan(const PlanSolution& plan, const Instance& inst,
                       const ScenarioSet& scen, const Neighborhoods& nb,
                       const CostParams& costs, double tol = 1e-6);

}  // namespace fleetmix
