#include "fleetmix/domain.hpp"

#include <algorithm>
#include <cmath>

namespace fleetmix {

double Instance::max_capacity() const {
  double m = 0.0;
  for (const auto& t : vehicle_types) m = std::max(m, t.capacity);
  return m;
}

int Instance::type_index(const std::string& type_id) const {
  for (int p = 0; p < num_types(); ++p)
    if (vehicle_types[p].id == type_id) return p;
  throw instance_error("unknown vehicle type id: " + type_id);
}

std::vector<double> ScenarioSet::expected_demand() const {
  std::vector<double> mean;
  if (demands.empty()) return mean;
  mean.assign(demands[0].size(), 0.0);
  for (int s = 0; s < num_scenarios(); ++s)
    for (std::size_t i = 0; i < mean.size(); ++i)
      mean[i] += probabilities[s] * demands[s][i];
  return mean;
}

Matrix build_distance_matrix(const std::vector<Node>& nodes) {
  const std::size_t n = nodes.size();
  if (n < 2) throw instance_error("build_distance_matrix: need at least 2 nodes");
  for (const auto& nd : nodes)
    if (std::isnan(nd.x) || std::isnan(nd.y))
      throw instance_error("build_distance_matrix: NaN coordinate at node " +
                           std::to_string(nd.id));
  Matrix d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = nodes[i].x - nodes[j].x;
      const double dy = nodes[i].y - nodes[j].y;
      d[i][j] = d[j][i] = std::sqrt(dx * dx + dy * dy);
    }
  }
  return d;
}

Instance make_instance(std::vector<Node> nodes, std::vector<VehicleType> types,
                       std::vector<double> service_time, double shift_limit) {
  Instance inst;
  inst.nodes = std::move(nodes);
  inst.vehicle_types = std::move(types);
  inst.service_time = std::move(service_time);
  inst.shift_limit = shift_limit;
  if (inst.service_time.empty())
    inst.service_time.assign(inst.nodes.size(), 0.0);
  inst.distance = build_distance_matrix(inst.nodes);
  inst.travel_time.resize(inst.vehicle_types.size());
  for (std::size_t p = 0; p < inst.vehicle_types.size(); ++p) {
    const double v = inst.vehicle_types[p].speed;
    inst.travel_time[p] = inst.distance;
    for (auto& row : inst.travel_time[p])
      for (double& t : row) t /= v;
  }
  validate_instance(inst);
  return inst;
}

void validate_instance(const Instance& inst) {
  if (inst.nodes.size() < 2)
    throw instance_error("instance needs a depot and at least one demand node");
  for (std::size_t i = 0; i < inst.nodes.size(); ++i)
    if (inst.nodes[i].id != static_cast<int>(i))
      throw instance_error("node ids must be contiguous 0..N, got " +
                           std::to_string(inst.nodes[i].id) + " at position " +
                           std::to_string(i));
  if (inst.nodes[0].base_demand != 0.0)
    throw instance_error("depot (node 0) must have zero base demand");
  for (const auto& nd : inst.nodes)
    if (nd.base_demand < 0.0)
      throw instance_error("negative base demand at node " + std::to_string(nd.id));
  if (inst.vehicle_types.empty())
    throw instance_error("instance needs at least one vehicle type");
  for (const auto& t : inst.vehicle_types) {
    if (t.capacity <= 0.0) throw instance_error("vehicle capacity must be > 0: " + t.id);
    if (t.speed <= 0.0) throw instance_error("vehicle speed must be > 0: " + t.id);
    if (t.fixed_cost < 0.0 || t.unit_distance_cost < 0.0)
      throw instance_error("vehicle costs must be >= 0: " + t.id);
    if (!(t.driving_range > 0.0))
      throw instance_error("driving range must be > 0: " + t.id);
  }
  if (inst.service_time.size() != inst.nodes.size())
    throw instance_error("service_time must have one entry per node");
  if (inst.shift_limit <= 0.0) throw instance_error("shift limit must be > 0");
}

void validate_scenarios(const Instance& inst, const ScenarioSet& scen) {
  if (scen.demands.empty()) throw instance_error("scenario set is empty");
  double total_prob = 0.0;
  for (int s = 0; s < scen.num_scenarios(); ++s) {
    if (scen.demands[s].size() != inst.nodes.size())
      throw instance_error("scenario " + std::to_string(s) +
                           " has wrong node count");
    if (scen.demands[s][0] != 0.0)
      throw instance_error("scenario " + std::to_string(s) +
                           " has nonzero depot demand");
    for (double d : scen.demands[s])
      if (d < 0.0 || std::isnan(d))
        throw instance_error("scenario " + std::to_string(s) + " has invalid demand");
    total_prob += scen.probabilities[s];
  }
  if (scen.probabilities.size() != scen.demands.size())
    throw instance_error("probability count mismatch");
  if (std::abs(total_prob - 1.0) > 1e-9)
    throw instance_error("scenario probabilities must sum to 1");
}

Neighborhoods build_neighborhoods(const Instance& inst, double out_radius,
                                  double in_radius) {
  if (out_radius <= 0.0 || in_radius <= 0.0)
    throw instance_error("neighborhood radii must be > 0");
  const int n = inst.num_nodes();
  Neighborhoods nb;
  nb.out_radius = out_radius;
  nb.in_radius = in_radius;
  nb.out_sets.resize(n);
  nb.in_sets.resize(n);
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j)
      if (inst.distance[j][i] <= out_radius) nb.out_sets[i].push_back(j);
  // in sets by duality: i can serve j  <=>  j is served from i.
  for (int i = 1; i < n; ++i)
    for (int j : nb.out_sets[i]) nb.in_sets[j].push_back(i);
  for (int j = 1; j < n; ++j)
    std::sort(nb.in_sets[j].begin(), nb.in_sets[j].end());
  return nb;
}

double fixed_route_cost(const Instance& inst, const VehicleType& p, int end_node) {
  if (end_node <= 0 || end_node >= inst.num_nodes())
    throw instance_error("fixed_route_cost: end node must be a demand node");
  return p.fixed_cost + p.unit_distance_cost * inst.distance[end_node][0];
}

double arc_cost(const Instance& inst, int type, int i, int j) {
  return inst.vehicle_types[type].unit_distance_cost * inst.distance[i][j];
}

double recourse_arc_cost(const Instance& inst, const CostParams& costs, int i, int j) {
  if (costs.recourse_cost_mode == RecourseCostMode::kFlat)
    return costs.beta * costs.recourse_unit_cost;
  return costs.beta * costs.recourse_unit_cost * inst.distance[i][j];
}

bool gamma_dominates_recourse(const CostParams& costs, double out_radius) {
  return costs.gamma >= costs.beta * costs.recourse_unit_cost * out_radius;
}

std::vector<VehicleType> standard_fleet(bool large_profile) {
  VehicleType cm{"CM", 15.0, 7.0, 0.20, 45.0, kInf};
  VehicleType ecb{"ECB", 5.0, 3.0, 0.15, 15.0, kInf};
  if (large_profile) {
    cm.capacity = 170.0;
    cm.fixed_cost = 13.0;
    ecb.capacity = 100.0;
    ecb.fixed_cost = 6.5;
    ecb.driving_range = 15.0;
  }
  return {cm, ecb};
}

}  // namespace fleetmix
