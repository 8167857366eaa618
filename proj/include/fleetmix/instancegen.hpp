#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fleetmix/domain.hpp"

namespace fleetmix {

/// Population-density surface: hexagonal cells with sampling weights.
struct DensityGrid {
  double cell_size = 0.5;  // km, edge-to-edge hex width
  struct Cell {
    double x = 0.0;
    double y = 0.0;
    double weight = 0.0;
  };
  std::vector<Cell> cells;
};

struct GenConfig {
  int n_requests = 20;
  int n_scenarios = 100;
  double noise_low = 0.0;
  double noise_high = 4.0;
  std::uint64_t seed = 0;
  bool round_demand = false;  // round scenario demands to integers on request
  std::optional<std::pair<double, double>> depot;  // default: weighted centroid
};

struct HexCell {
  long q = 0;  // axial column
  long r = 0;  // axial row
  double x = 0.0;
  double y = 0.0;
  int count = 0;
};

/// Assigns each point to its hexagonal cell (pointy-top axial tiling whose
/// edge-to-edge width is cell_size) and counts occupants. Cells come back in
/// canonical axial order: ascending row r, then column q.
std::vector<HexCell> aggregate_hex(const std::vector<std::pair<double, double>>& points,
                                   double cell_size);

/// Center coordinates of the axial cell (q, r) for the given cell size.
std::pair<double, double> hex_center(long q, long r, double cell_size);

/// Samples cfg.n_requests delivery requests over the grid cells (probability
/// proportional to weight); every nonempty cell becomes one demand node at
/// the cell center with base_demand equal to its request count. The depot
/// sits at the request-weighted centroid unless cfg.depot overrides it.
Instance generate_synthetic(const DensityGrid& grid, const GenConfig& cfg,
                            std::vector<VehicleType> fleet = standard_fleet(),
                            double shift_limit = kDefaultShiftLimit);

/// Scenario demands d[i][s] = base_demand[i] * rho with rho drawn
/// independently per (node, scenario) from U(noise_low, noise_high);
/// uniform scenario probabilities.
ScenarioSet perturb_demand(const Instance& base, const GenConfig& cfg);

struct IngestOptions {
  double cell_size = 0.0;  // > 0 aggregates locations into hex cells
  int max_nodes = 0;       // > 0 keeps the highest-demand nodes only
  std::vector<VehicleType> fleet = standard_fleet(true);
  double shift_limit = kDefaultShiftLimit;
  bool round_demand = false;
};

struct IngestReport {
  int days_total = 0;
  int days_kept = 0;
  int locations_total = 0;
  int nodes_kept = 0;
  double demand_fraction_retained = 1.0;
  std::vector<std::string> warnings;
};

struct ingest_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads operational data (CSV header "day,x,y,parcels", one row per
/// day/location) into an instance whose base demands are the per-node means
/// and a scenario set with one equiprobable scenario per day. Malformed rows
/// raise ingest_error naming the line; zero-demand days are dropped with a
/// warning in the report.
std::pair<Instance, ScenarioSet> ingest_operational(const std::string& csv_path,
                                                    const IngestOptions& opts,
                                                    IngestReport* report = nullptr);

}  // namespace fleetmix
