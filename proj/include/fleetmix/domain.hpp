#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fleetmix {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// One location in the delivery network. Node 0 is always the distribution
/// center (depot); nodes 1..N carry demand.
struct Node {
  int id = 0;
  double x = 0.0;  // km
  double y = 0.0;  // km
  double base_demand = 0.0;  // parcel units, 0 for the depot
};

struct VehicleType {
  std::string id;            // e.g. "CM", "ECB"
  double capacity = 0.0;     // parcel units
  double fixed_cost = 0.0;   // EUR/day per vehicle
  double unit_distance_cost = 0.0;  // EUR/km
  double speed = 0.0;        // km/h
  double driving_range = kInf;  // km, kInf = unbounded
};

using Matrix = std::vector<std::vector<double>>;

/// Immutable problem data: nodes, fleet catalog and the derived distance and
/// travel-time matrices. Construct via make_instance so the derived members
/// stay consistent.
struct Instance {
  std::vector<Node> nodes;
  std::vector<VehicleType> vehicle_types;
  Matrix distance;                        // km, [i][j]
  std::vector<Matrix> travel_time;        // hours, [type][i][j]
  std::vector<double> service_time;       // hours, per node
  double shift_limit = 0.0;               // hours

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_demand_nodes() const { return num_nodes() - 1; }
  int num_types() const { return static_cast<int>(vehicle_types.size()); }

  /// Largest capacity over the fleet catalog.
  double max_capacity() const;

  int type_index(const std::string& type_id) const;
};

/// Per-node demand realizations with scenario probabilities.
struct ScenarioSet {
  Matrix demands;                   // [scenario][node], column 0 is the depot
  std::vector<double> probabilities;

  int num_scenarios() const { return static_cast<int>(demands.size()); }

  /// Probability-weighted demand vector (one entry per node).
  std::vector<double> expected_demand() const;
};

/// Recourse reachability sets. out_sets[i] lists the demand nodes servable
/// from i; in_sets[j] lists the demand nodes j can be served from. The two
/// are duals of each other and every demand node belongs to its own out set.
struct Neighborhoods {
  double out_radius = 0.0;  // km
  double in_radius = 0.0;   // km
  std::vector<std::vector<int>> out_sets;  // indexed by node id, depot entry empty
  std::vector<std::vector<int>> in_sets;
};

enum class RecourseCostMode { kFlat, kDistance };

struct CostParams {
  double beta = 2.0;                // recourse conservatism multiplier, >= 1
  double gamma = 100.0;             // EUR per unserved demand unit
  double recourse_unit_cost = 0.20; // EUR/km for recourse actions
  RecourseCostMode recourse_cost_mode = RecourseCostMode::kDistance;
};

struct instance_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Euclidean distances on the planar km coordinates. Zero diagonal; duplicate
/// coordinates yield zero distance; NaN coordinates are rejected.
Matrix build_distance_matrix(const std::vector<Node>& nodes);

/// Assembles an Instance and derives distance and travel-time matrices.
/// service_time may be empty (all zeros) or have one entry per node.
Instance make_instance(std::vector<Node> nodes, std::vector<VehicleType> types,
                       std::vector<double> service_time, double shift_limit);

/// Validates the structural invariants (contiguous ids, demand signs,
/// probability normalization) and throws instance_error on violation.
void validate_instance(const Instance& inst);
void validate_scenarios(const Instance& inst, const ScenarioSet& scen);

/// out_sets[i] = demand nodes j with distance(j,i) <= out_radius; in_sets by
/// duality. Warns (returns normally) whichever radii are given.
Neighborhoods build_neighborhoods(const Instance& inst, double out_radius,
                                  double in_radius);

/// Daily cost of a route that ends at end_node when run by type p:
/// fixed ownership cost plus the return leg to the depot.
double fixed_route_cost(const Instance& inst, const VehicleType& p, int end_node);

/// Distance-proportional cost of traversing arc (i,j) with type p.
double arc_cost(const Instance& inst, int type, int i, int j);

/// Unit recourse cost of serving j from i (applies the cost mode).
double recourse_arc_cost(const Instance& inst, const CostParams& costs, int i, int j);

/// True when gamma is large enough that outsourcing never undercuts a
/// recourse action at the neighborhood radius.
bool gamma_dominates_recourse(const CostParams& costs, double out_radius);

/// The stock two-type fleet (conventional motorcycle "CM" + electric cargo
/// bike "ECB"). The large profile swaps in the van-scale capacities, fixed
/// costs and the ECB driving range used for operational data.
std::vector<VehicleType> standard_fleet(bool large_profile = false);

/// Default neighborhood radius (km) used when none is configured.
constexpr double kDefaultNeighborhoodRadius = 2.0;
/// Default shift limit (hours).
constexpr double kDefaultShiftLimit = 5.0;

}  // namespace fleetmix
