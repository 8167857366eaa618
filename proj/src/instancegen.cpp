#include "fleetmix/instancegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fleetmix/rng.hpp"

namespace fleetmix {

namespace {

// Pointy-top hexagons: the circumradius follows from the edge-to-edge width.
double hex_radius(double cell_size) { return cell_size / std::sqrt(3.0); }

std::pair<long, long> axial_of_point(double x, double y, double cell_size) {
  const double s = hex_radius(cell_size);
  const double qf = (std::sqrt(3.0) / 3.0 * x - y / 3.0) / s;
  const double rf = (2.0 / 3.0 * y) / s;
  // cube rounding
  double cx = qf, cz = rf, cy = -cx - cz;
  double rx = std::round(cx), ry = std::round(cy), rz = std::round(cz);
  const double dx = std::abs(rx - cx), dy = std::abs(ry - cy), dz = std::abs(rz - cz);
  if (dx > dy && dx > dz)
    rx = -ry - rz;
  else if (dy > dz)
    ry = -rx - rz;
  else
    rz = -rx - ry;
  return {static_cast<long>(rx), static_cast<long>(rz)};
}

}  // namespace

std::pair<double, double> hex_center(long q, long r, double cell_size) {
  const double s = hex_radius(cell_size);
  const double x = s * std::sqrt(3.0) * (static_cast<double>(q) + static_cast<double>(r) / 2.0);
  const double y = s * 1.5 * static_cast<double>(r);
  return {x, y};
}

std::vector<HexCell> aggregate_hex(const std::vector<std::pair<double, double>>& points,
                                   double cell_size) {
  if (cell_size <= 0.0) throw instance_error("aggregate_hex: cell_size must be > 0");
  std::map<std::pair<long, long>, int> counts;  // (r, q) keeps canonical order
  for (const auto& [x, y] : points) {
    auto [q, r] = axial_of_point(x, y, cell_size);
    ++counts[{r, q}];
  }
  std::vector<HexCell> cells;
  cells.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    HexCell c;
    c.r = key.first;
    c.q = key.second;
    auto [cx, cy] = hex_center(c.q, c.r, cell_size);
    c.x = cx;
    c.y = cy;
    c.count = count;
    cells.push_back(c);
  }
  return cells;
}

Instance generate_synthetic(const DensityGrid& grid, const GenConfig& cfg,
                            std::vector<VehicleType> fleet, double shift_limit) {
  if (grid.cells.empty()) throw instance_error("generate_synthetic: empty grid");
  if (cfg.n_requests <= 0) throw instance_error("generate_synthetic: n_requests must be > 0");
  double total_weight = 0.0;
  std::vector<double> weights;
  weights.reserve(grid.cells.size());
  for (const auto& c : grid.cells) {
    if (c.weight < 0.0) throw instance_error("generate_synthetic: negative cell weight");
    weights.push_back(c.weight);
    total_weight += c.weight;
  }
  if (total_weight <= 0.0) throw instance_error("generate_synthetic: all weights zero");

  Rng rng = Rng::substream(cfg.seed, 0);
  std::vector<int> counts(grid.cells.size(), 0);
  for (int k = 0; k < cfg.n_requests; ++k) ++counts[rng.weighted_index(weights)];

  double cx = 0.0, cy = 0.0;
  for (std::size_t c = 0; c < grid.cells.size(); ++c) {
    cx += counts[c] * grid.cells[c].x;
    cy += counts[c] * grid.cells[c].y;
  }
  cx /= cfg.n_requests;
  cy /= cfg.n_requests;
  if (cfg.depot) {
    cx = cfg.depot->first;
    cy = cfg.depot->second;
  }

  std::vector<Node> nodes;
  nodes.push_back({0, cx, cy, 0.0});
  for (std::size_t c = 0; c < grid.cells.size(); ++c) {
    if (counts[c] == 0) continue;
    Node nd;
    nd.id = static_cast<int>(nodes.size());
    nd.x = grid.cells[c].x;
    nd.y = grid.cells[c].y;
    nd.base_demand = counts[c];
    nodes.push_back(nd);
  }
  return make_instance(std::move(nodes), std::move(fleet), {}, shift_limit);
}

ScenarioSet perturb_demand(const Instance& base, const GenConfig& cfg) {
  if (cfg.n_scenarios <= 0) throw instance_error("perturb_demand: n_scenarios must be > 0");
  if (!(cfg.noise_low >= 0.0) || !(cfg.noise_low <= cfg.noise_high))
    throw instance_error("perturb_demand: need 0 <= noise_low <= noise_high");
  Rng rng = Rng::substream(cfg.seed, 1);
  ScenarioSet scen;
  scen.demands.assign(cfg.n_scenarios, std::vector<double>(base.num_nodes(), 0.0));
  scen.probabilities.assign(cfg.n_scenarios, 1.0 / cfg.n_scenarios);
  for (int s = 0; s < cfg.n_scenarios; ++s) {
    for (int i = 1; i < base.num_nodes(); ++i) {
      const double rho = cfg.noise_low == cfg.noise_high
                             ? cfg.noise_low
                             : rng.uniform(cfg.noise_low, cfg.noise_high);
      double d = base.nodes[i].base_demand * rho;
      if (cfg.round_demand) d = std::round(d);
      scen.demands[s][i] = d;
    }
  }
  validate_scenarios(base, scen);
  return scen;
}

std::pair<Instance, ScenarioSet> ingest_operational(const std::string& csv_path,
                                                    const IngestOptions& opts,
                                                    IngestReport* report) {
  std::ifstream in(csv_path);
  if (!in) throw ingest_error("cannot open " + csv_path);

  struct Obs {
    int day_idx;
    int loc_idx;
    double parcels;
  };
  std::vector<Obs> observations;
  std::vector<std::string> day_names;
  std::map<std::string, int> day_index;
  std::vector<std::pair<double, double>> locations;
  std::map<std::pair<double, double>, int> loc_index;

  std::string line;
  int line_no = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string day, xs, ys, ps;
    const bool shaped = std::getline(ls, day, ',') && std::getline(ls, xs, ',') &&
                        std::getline(ls, ys, ',') && std::getline(ls, ps);
    if (!header_checked) {
      header_checked = true;
      if (shaped && (day == "day" || day == "scenario")) continue;  // header row
    }
    if (!shaped)
      throw ingest_error(csv_path + ":" + std::to_string(line_no) +
                         ": expected day,x,y,parcels");
    double x, y, parcels;
    try {
      x = std::stod(xs);
      y = std::stod(ys);
      parcels = std::stod(ps);
    } catch (const std::exception&) {
      throw ingest_error(csv_path + ":" + std::to_string(line_no) +
                         ": non-numeric field");
    }
    if (parcels < 0.0)
      throw ingest_error(csv_path + ":" + std::to_string(line_no) +
                         ": negative demand");
    if (!day_index.count(day)) {
      day_index[day] = static_cast<int>(day_names.size());
      day_names.push_back(day);
    }
    std::pair<double, double> loc{x, y};
    if (opts.cell_size > 0.0) {
      auto [q, r] = axial_of_point(x, y, opts.cell_size);
      loc = hex_center(q, r, opts.cell_size);
    }
    if (!loc_index.count(loc)) {
      loc_index[loc] = static_cast<int>(locations.size());
      locations.push_back(loc);
    }
    observations.push_back({day_index[day], loc_index[loc], parcels});
  }
  if (observations.empty()) throw ingest_error(csv_path + ": no data rows");

  const int n_days = static_cast<int>(day_names.size());
  const int n_locs = static_cast<int>(locations.size());
  Matrix demand(n_days, std::vector<double>(n_locs, 0.0));
  for (const auto& o : observations) demand[o.day_idx][o.loc_idx] += o.parcels;

  IngestReport rep;
  rep.days_total = n_days;
  rep.locations_total = n_locs;

  // drop days with no demand at all
  std::vector<int> kept_days;
  for (int d = 0; d < n_days; ++d) {
    double tot = 0.0;
    for (double v : demand[d]) tot += v;
    if (tot > 0.0)
      kept_days.push_back(d);
    else
      rep.warnings.push_back("day " + day_names[d] + " has zero total demand, dropped");
  }
  if (kept_days.empty()) throw ingest_error(csv_path + ": every day has zero demand");
  rep.days_kept = static_cast<int>(kept_days.size());

  // node retention by total demand
  std::vector<double> loc_total(n_locs, 0.0);
  double grand_total = 0.0;
  for (int d : kept_days)
    for (int l = 0; l < n_locs; ++l) {
      loc_total[l] += demand[d][l];
      grand_total += demand[d][l];
    }
  std::vector<int> loc_order(n_locs);
  for (int l = 0; l < n_locs; ++l) loc_order[l] = l;
  std::stable_sort(loc_order.begin(), loc_order.end(),
                   [&](int a, int b) { return loc_total[a] > loc_total[b]; });
  int keep = n_locs;
  if (opts.max_nodes > 0 && opts.max_nodes < n_locs) keep = opts.max_nodes;
  std::vector<int> kept_locs(loc_order.begin(), loc_order.begin() + keep);
  std::sort(kept_locs.begin(), kept_locs.end());  // stable node numbering
  double kept_total = 0.0;
  for (int l : kept_locs) kept_total += loc_total[l];
  rep.nodes_kept = keep;
  rep.demand_fraction_retained = grand_total > 0.0 ? kept_total / grand_total : 1.0;

  // depot: demand-weighted centroid of the retained locations
  double cx = 0.0, cy = 0.0;
  for (int l : kept_locs) {
    cx += loc_total[l] * locations[l].first;
    cy += loc_total[l] * locations[l].second;
  }
  cx /= kept_total;
  cy /= kept_total;

  std::vector<Node> nodes;
  nodes.push_back({0, cx, cy, 0.0});
  for (int l : kept_locs) {
    Node nd;
    nd.id = static_cast<int>(nodes.size());
    nd.x = locations[l].first;
    nd.y = locations[l].second;
    double mean = loc_total[l] / rep.days_kept;
    nd.base_demand = opts.round_demand ? std::round(mean) : mean;
    nodes.push_back(nd);
  }
  Instance inst = make_instance(std::move(nodes), opts.fleet, {}, opts.shift_limit);

  ScenarioSet scen;
  scen.probabilities.assign(rep.days_kept, 1.0 / rep.days_kept);
  for (int d : kept_days) {
    std::vector<double> row(inst.num_nodes(), 0.0);
    for (std::size_t k = 0; k < kept_locs.size(); ++k) {
      double v = demand[d][kept_locs[k]];
      row[k + 1] = opts.round_demand ? std::round(v) : v;
    }
    scen.demands.push_back(std::move(row));
  }
  validate_scenarios(inst, scen);
  if (report) *report = rep;
  return {std::move(inst), std::move(scen)};
}

}  // namespace fleetmix
