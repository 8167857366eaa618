#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fleetmix/domain.hpp"
#include "fleetmix/rng.hpp"

using namespace fleetmix;

namespace {

Instance line_instance(int n_demand, double spacing) {
  std::vector<Node> nodes;
  nodes.push_back({0, 0.0, 0.0, 0.0});
  for (int i = 1; i <= n_demand; ++i)
    nodes.push_back({i, i * spacing, 0.0, 1.0});
  return make_instance(nodes, standard_fleet(), {}, kDefaultShiftLimit);
}

}  // namespace

TEST_CASE("distance matrix basics") {
  std::vector<Node> nodes{{0, 0.0, 0.0, 0.0}, {1, 3.0, 4.0, 1.0}};
  auto d = build_distance_matrix(nodes);
  CHECK(d[0][1] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(d[1][0] == doctest::Approx(5.0));
  CHECK(d[0][0] == 0.0);

  std::vector<Node> dup{{0, 1.0, 1.0, 0.0}, {1, 1.0, 1.0, 1.0}};
  auto d2 = build_distance_matrix(dup);
  CHECK(d2[0][1] == 0.0);

  std::vector<Node> tri{{0, 0.0, 0.0, 0.0}, {1, 1.0, 0.0, 1.0}, {2, 0.0, 1.0, 1.0}};
  auto d3 = build_distance_matrix(tri);
  CHECK(d3[1][2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  std::vector<Node> bad{{0, 0.0, 0.0, 0.0}, {1, std::nan(""), 0.0, 1.0}};
  CHECK_THROWS_AS(build_distance_matrix(bad), instance_error);
  CHECK_THROWS_AS(build_distance_matrix({nodes[0]}), instance_error);
}

TEST_CASE("travel time derived from speed") {
  auto inst = line_instance(4, 1.5);
  for (int p = 0; p < inst.num_types(); ++p)
    for (int i = 0; i < inst.num_nodes(); ++i)
      for (int j = 0; j < inst.num_nodes(); ++j) {
        const double expect = inst.distance[i][j] / inst.vehicle_types[p].speed;
        if (expect == 0.0)
          CHECK(inst.travel_time[p][i][j] == 0.0);
        else
          CHECK(std::abs(inst.travel_time[p][i][j] - expect) / expect < 1e-12);
      }
}

TEST_CASE("neighborhood radius extremes") {
  auto inst = line_instance(3, 1.0);
  auto tiny = build_neighborhoods(inst, 1e-6, 1e-6);
  for (int i = 1; i <= 3; ++i) {
    REQUIRE(tiny.out_sets[i].size() == 1);
    CHECK(tiny.out_sets[i][0] == i);
  }
  auto full = build_neighborhoods(inst, 100.0, 100.0);
  for (int i = 1; i <= 3; ++i) CHECK(full.out_sets[i].size() == 3);
}

TEST_CASE("collinear neighborhoods at 1.5 km") {
  auto inst = line_instance(3, 1.0);
  auto nb = build_neighborhoods(inst, 1.5, 1.5);
  CHECK(nb.out_sets[1].size() == 2);
  CHECK(nb.out_sets[2].size() == 3);  // middle node reaches both ends
  CHECK(nb.out_sets[3].size() == 2);
}

TEST_CASE("neighborhood duality and monotonicity") {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.uniform_int(2, 12);
    std::vector<Node> nodes{{0, 0.0, 0.0, 0.0}};
    for (int i = 1; i <= n; ++i)
      nodes.push_back({i, rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), 1.0});
    auto inst = make_instance(nodes, standard_fleet(), {}, kDefaultShiftLimit);
    const double r1 = rng.uniform(0.5, 3.0);
    auto nb = build_neighborhoods(inst, r1, r1);
    // duality, exhaustively
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        const bool j_in_out_i =
            std::count(nb.out_sets[i].begin(), nb.out_sets[i].end(), j) > 0;
        const bool i_in_in_j =
            std::count(nb.in_sets[j].begin(), nb.in_sets[j].end(), i) > 0;
        CHECK(j_in_out_i == i_in_in_j);
        if (i == j) CHECK(j_in_out_i);
      }
    for (int i = 1; i <= n; ++i)
      for (int j : nb.out_sets[i]) CHECK(j != 0);
    // growing the radius never removes members
    auto nb2 = build_neighborhoods(inst, r1 + 1.0, r1 + 1.0);
    for (int i = 1; i <= n; ++i)
      for (int j : nb.out_sets[i])
        CHECK(std::count(nb2.out_sets[i].begin(), nb2.out_sets[i].end(), j) == 1);
  }
}

TEST_CASE("fixed route cost") {
  std::vector<Node> nodes{{0, 0.0, 0.0, 0.0}, {1, 10.0, 0.0, 1.0}, {2, 0.0, 2.0, 1.0},
                          {3, 0.0, 0.0, 1.0}};
  auto inst = make_instance(nodes, standard_fleet(), {}, kDefaultShiftLimit);
  const auto& cm = inst.vehicle_types[inst.type_index("CM")];
  const auto& ecb = inst.vehicle_types[inst.type_index("ECB")];
  CHECK(fixed_route_cost(inst, cm, 1) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(fixed_route_cost(inst, ecb, 2) == doctest::Approx(3.3).epsilon(1e-12));
  CHECK(fixed_route_cost(inst, cm, 3) == doctest::Approx(cm.fixed_cost));
  CHECK_THROWS_AS(fixed_route_cost(inst, cm, 0), instance_error);
  CHECK_THROWS_AS((void)inst.type_index("VAN"), instance_error);
}

TEST_CASE("recourse cost modes") {
  auto inst = line_instance(2, 2.0);
  CostParams costs;
  costs.beta = 2.0;
  costs.recourse_unit_cost = 0.25;
  costs.recourse_cost_mode = RecourseCostMode::kDistance;
  CHECK(recourse_arc_cost(inst, costs, 1, 2) == doctest::Approx(2.0 * 0.25 * 2.0));
  costs.recourse_cost_mode = RecourseCostMode::kFlat;
  CHECK(recourse_arc_cost(inst, costs, 1, 2) == doctest::Approx(0.5));
  CHECK(gamma_dominates_recourse(costs, 2.0));
  costs.gamma = 0.1;
  CHECK_FALSE(gamma_dominates_recourse(costs, 2.0));
}

TEST_CASE("validation rejects malformed data") {
  auto fleet = standard_fleet();
  std::vector<Node> bad_ids{{0, 0, 0, 0}, {2, 1, 1, 1}};
  CHECK_THROWS_AS(make_instance(bad_ids, fleet, {}, 5.0), instance_error);
  std::vector<Node> neg{{0, 0, 0, 0}, {1, 1, 1, -2.0}};
  CHECK_THROWS_AS(make_instance(neg, fleet, {}, 5.0), instance_error);

  auto inst = line_instance(2, 1.0);
  ScenarioSet scen;
  scen.demands = {{0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}};
  scen.probabilities = {0.5, 0.5};
  CHECK_NOTHROW(validate_scenarios(inst, scen));
  CHECK(scen.expected_demand()[1] == doctest::Approx(1.5));
  scen.probabilities = {0.6, 0.5};
  CHECK_THROWS_AS(validate_scenarios(inst, scen), instance_error);
  scen.probabilities = {0.5, 0.5};
  scen.demands[0][0] = 1.0;
  CHECK_THROWS_AS(validate_scenarios(inst, scen), instance_error);
}
