#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "fleetmix/instancegen.hpp"
#include "fleetmix/rng.hpp"

using namespace fleetmix;

TEST_CASE("hex aggregation basics") {
  CHECK(aggregate_hex({}, 0.5).empty());

  auto one = aggregate_hex({{1.3, 2.7}}, 0.5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].count == 1);

  auto two = aggregate_hex({{1.0, 1.0}, {1.0, 1.01}}, 0.5);
  REQUIRE(two.size() == 1);
  CHECK(two[0].count == 2);
}

TEST_CASE("hex cells are the voronoi cells of their centers") {
  // brute-force point-to-cell oracle: each point must land in the cell whose
  // center is nearest among all lattice centers in range
  Rng rng(31);
  const double cell = 0.5;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 100; ++i)
    pts.push_back({rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)});
  auto cells = aggregate_hex(pts, cell);

  int total = 0;
  for (const auto& c : cells) total += c.count;
  CHECK(total == 100);

  // the sampled area is 5x5 km; cells of width 0.5 tile it with at most
  // ceil((5/0.5)+1) * ceil(5/(0.75*2*r)+1) centers
  const double rad = cell / std::sqrt(3.0);
  const int max_cols = static_cast<int>(std::ceil(5.0 / cell)) + 2;
  const int max_rows = static_cast<int>(std::ceil(5.0 / (1.5 * rad))) + 2;
  CHECK(static_cast<int>(cells.size()) <= max_cols * max_rows);

  // canonical order: ascending (r, q)
  for (std::size_t k = 1; k < cells.size(); ++k) {
    const bool ordered = cells[k - 1].r < cells[k].r ||
                         (cells[k - 1].r == cells[k].r && cells[k - 1].q < cells[k].q);
    CHECK(ordered);
  }

  // nearest-center property, checked per point against every returned center
  // plus a generous lattice neighborhood
  for (const auto& [px, py] : pts) {
    double best = 1e300;
    long bq = 0, br = 0;
    for (long q = -20; q <= 20; ++q)
      for (long r = -20; r <= 20; ++r) {
        auto [cx, cy] = hex_center(q, r, cell);
        const double d = std::hypot(px - cx, py - cy);
        if (d < best) {
          best = d;
          bq = q;
          br = r;
        }
      }
    // find the aggregate cell that contains this point's nearest center
    bool found = false;
    for (const auto& c : cells)
      if (c.q == bq && c.r == br) found = true;
    CHECK(found);
  }
}

TEST_CASE("synthetic generation shapes and determinism") {
  DensityGrid grid;
  grid.cell_size = 0.5;
  Rng rng(7);
  for (int i = 0; i < 12; ++i)
    grid.cells.push_back({rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0),
                          rng.uniform(0.0, 3.0)});
  grid.cells[3].weight = 0.0;

  GenConfig cfg;
  cfg.n_requests = 30;
  cfg.seed = 99;
  auto inst = generate_synthetic(grid, cfg);
  double total = 0.0;
  for (const auto& nd : inst.nodes) total += nd.base_demand;
  CHECK(total == doctest::Approx(30.0));  // every request lands somewhere

  auto inst2 = generate_synthetic(grid, cfg);
  REQUIRE(inst.num_nodes() == inst2.num_nodes());
  for (int i = 0; i < inst.num_nodes(); ++i) {
    CHECK(inst.nodes[i].x == inst2.nodes[i].x);
    CHECK(inst.nodes[i].y == inst2.nodes[i].y);
    CHECK(inst.nodes[i].base_demand == inst2.nodes[i].base_demand);
  }
}

TEST_CASE("single-cell and degenerate-weight grids") {
  DensityGrid grid;
  grid.cells = {{1.0, 1.0, 1.0}};
  GenConfig cfg;
  cfg.n_requests = 20;
  cfg.seed = 1;
  auto inst = generate_synthetic(grid, cfg);
  REQUIRE(inst.num_demand_nodes() == 1);
  CHECK(inst.nodes[1].base_demand == doctest::Approx(20.0));

  DensityGrid grid2;
  grid2.cells = {{0.0, 0.0, 1.0}, {3.0, 3.0, 0.0}};
  cfg.n_requests = 50;
  auto inst2 = generate_synthetic(grid2, cfg);
  REQUIRE(inst2.num_demand_nodes() == 1);
  CHECK(inst2.nodes[1].base_demand == doctest::Approx(50.0));
  CHECK(inst2.nodes[1].x == doctest::Approx(0.0));
}

TEST_CASE("weighted sampling concentrates as expected") {
  DensityGrid grid;
  grid.cells = {{0.0, 0.0, 1.0}, {3.0, 0.0, 3.0}};
  GenConfig cfg;
  cfg.n_requests = 10000;
  cfg.seed = 20250101;
  auto inst = generate_synthetic(grid, cfg);
  REQUIRE(inst.num_demand_nodes() == 2);
  // binomial(n=10000, p=0.75): 3 sigma ~ 0.013
  const double share = inst.nodes[2].base_demand / 10000.0;
  const double sigma = std::sqrt(0.75 * 0.25 / 10000.0);
  CHECK(std::abs(share - 0.75) <= 3.0 * sigma);
}

TEST_CASE("demand perturbation") {
  DensityGrid grid;
  grid.cells = {{0.0, 0.0, 1.0}, {2.0, 0.0, 1.0}, {0.0, 2.0, 1.0}};
  GenConfig cfg;
  cfg.n_requests = 12;
  cfg.seed = 5;

  auto inst = generate_synthetic(grid, cfg);

  SUBCASE("degenerate noise freezes demands") {
    cfg.noise_low = cfg.noise_high = 1.0;
    cfg.n_scenarios = 7;
    auto scen = perturb_demand(inst, cfg);
    REQUIRE(scen.num_scenarios() == 7);
    for (int s = 0; s < 7; ++s) {
      CHECK(scen.probabilities[s] == doctest::Approx(1.0 / 7));
      for (int i = 1; i < inst.num_nodes(); ++i)
        CHECK(scen.demands[s][i] == doctest::Approx(inst.nodes[i].base_demand));
    }
  }

  SUBCASE("zero base demand stays zero, sample mean matches U(0,4)") {
    // force one node to zero demand through a custom instance
    std::vector<Node> nodes{{0, 0, 0, 0}, {1, 1, 0, 2.0}, {2, 0, 1, 0.0}};
    auto base = make_instance(nodes, standard_fleet(), {}, kDefaultShiftLimit);
    GenConfig pc;
    pc.seed = 11;
    pc.n_scenarios = 100000;
    auto scen = perturb_demand(base, pc);
    double mean = 0.0;
    for (int s = 0; s < pc.n_scenarios; ++s) {
      CHECK(scen.demands[s][2] == 0.0);
      mean += scen.demands[s][1];
    }
    mean /= pc.n_scenarios;
    // E[2 rho] = 4 with rho ~ U(0,4); sd of the mean = 2*(4/sqrt(12))/sqrt(n)
    const double sigma = 2.0 * (4.0 / std::sqrt(12.0)) / std::sqrt(1e5);
    CHECK(std::abs(mean - 4.0) <= 3.0 * sigma);
  }

  SUBCASE("determinism and node count preserved") {
    cfg.n_scenarios = 9;
    auto a = perturb_demand(inst, cfg);
    auto b = perturb_demand(inst, cfg);
    REQUIRE(a.demands == b.demands);
    CHECK(static_cast<int>(a.demands[0].size()) == inst.num_nodes());
  }
}

TEST_CASE("operational ingestion") {
  const char* path = "ingest_test.csv";

  SUBCASE("two days, three nodes") {
    std::ofstream f(path);
    f << "day,x,y,parcels\n";
    f << "mon,0.0,0.0,3\nmon,1.0,0.0,2\nmon,0.0,1.0,1\n";
    f << "tue,0.0,0.0,1\ntue,1.0,0.0,4\ntue,0.0,1.0,2\n";
    f.close();
    IngestReport rep;
    auto [inst, scen] = ingest_operational(path, {}, &rep);
    CHECK(inst.num_demand_nodes() == 3);
    REQUIRE(scen.num_scenarios() == 2);
    CHECK(scen.probabilities[0] == doctest::Approx(0.5));
    CHECK(scen.probabilities[1] == doctest::Approx(0.5));
    CHECK(rep.demand_fraction_retained == doctest::Approx(1.0));
  }

  SUBCASE("negative demand names the line") {
    std::ofstream f(path);
    f << "day,x,y,parcels\nmon,0,0,5\nmon,1,1,-2\n";
    f.close();
    try {
      ingest_operational(path, {});
      FAIL("expected ingest_error");
    } catch (const ingest_error& e) {
      CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
  }

  SUBCASE("84 days give 84 equiprobable scenarios") {
    std::ofstream f(path);
    f << "day,x,y,parcels\n";
    for (int d = 0; d < 84; ++d)
      f << "d" << d << ",0,0," << (d % 5 + 1) << "\n"
        << "d" << d << ",2,1," << (d % 3 + 1) << "\n";
    f.close();
    auto [inst, scen] = ingest_operational(path, {});
    REQUIRE(scen.num_scenarios() == 84);
    for (double p : scen.probabilities) CHECK(p == doctest::Approx(1.0 / 84));
  }

  SUBCASE("zero-demand days dropped with warning") {
    std::ofstream f(path);
    f << "day,x,y,parcels\nmon,0,0,5\nmon,1,1,1\ntue,0,0,0\ntue,1,1,0\n";
    f.close();
    IngestReport rep;
    auto [inst, scen] = ingest_operational(path, {}, &rep);
    CHECK(scen.num_scenarios() == 1);
    REQUIRE(rep.warnings.size() == 1);
  }

  SUBCASE("node retention reports the demand fraction") {
    std::ofstream f(path);
    f << "day,x,y,parcels\nmon,0,0,8\nmon,3,0,1\nmon,0,3,1\n";
    f.close();
    IngestOptions opts;
    opts.max_nodes = 1;
    IngestReport rep;
    auto [inst, scen] = ingest_operational(path, opts, &rep);
    CHECK(inst.num_demand_nodes() == 1);
    CHECK(rep.demand_fraction_retained == doctest::Approx(0.8));
  }

  std::remove(path);
}
