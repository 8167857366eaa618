#include "fleetmix/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fleetmix/simplex.hpp"

namespace fleetmix {

namespace {

std::string tag(int i) { return std::to_string(i); }

double scenario_term(const ScenarioSet& scen, int s) { return scen.probabilities[s]; }

}  // namespace

NodeModel build_node_model(const Instance& inst, const ScenarioSet& scen,
                           const Neighborhoods& nb, const CostParams& costs,
                           bool with_valid_ineq) {
  validate_instance(inst);
  validate_scenarios(inst, scen);
  if (nb.out_sets.size() != static_cast<std::size_t>(inst.num_nodes()))
    throw instance_error("build_node_model: neighborhoods missing or mismatched");
  if (inst.shift_limit <= 0.0)
    throw instance_error("build_node_model: nonpositive shift limit");

  NodeModel m;
  m.N = inst.num_demand_nodes();
  m.P = inst.num_types();
  m.S = scen.num_scenarios();
  const int N = m.N, P = m.P, S = m.S;
  const double lmax = inst.max_capacity();
  const double tbar = inst.shift_limit;
  MipModel& mip = m.mip;

  m.z.assign(N + 1, std::vector<int>(P, -1));
  m.v.assign(N + 1, std::vector<int>(P, -1));
  m.x.assign(P, std::vector<std::vector<int>>(N + 1, std::vector<int>(N + 1, -1)));
  for (int p = 0; p < P; ++p) {
    const auto& vt = inst.vehicle_types[p];
    for (int i = 1; i <= N; ++i) {
      m.z[i][p] = mip.add_var("z_" + tag(i) + "_" + vt.id, VarKind::kBinary, 0, 1,
                              fixed_route_cost(inst, vt, i));
      m.v[i][p] = mip.add_var("v_" + tag(i) + "_" + vt.id, VarKind::kBinary, 0, 1, 0.0);
    }
    for (int i = 0; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        if (i == j) continue;
        m.x[p][i][j] = mip.add_var("x_" + tag(i) + "_" + tag(j) + "_" + vt.id,
                                   VarKind::kBinary, 0, 1, arc_cost(inst, p, i, j));
      }
  }
  m.y.assign(S, std::vector<std::vector<int>>(N + 1, std::vector<int>(N + 1, -1)));
  m.w.assign(S, std::vector<int>(N + 1, -1));
  m.u.assign(S, std::vector<int>(N + 1, -1));
  m.tau.assign(S, std::vector<int>(N + 1, -1));
  for (int s = 0; s < S; ++s) {
    const double pi = scenario_term(scen, s);
    for (int i = 1; i <= N; ++i)
      for (int j : nb.out_sets[i])
        m.y[s][i][j] = mip.add_var("y_" + tag(i) + "_" + tag(j) + "_s" + tag(s),
                                   VarKind::kContinuous, 0, 1,
                                   pi * recourse_arc_cost(inst, costs, i, j));
    for (int i = 1; i <= N; ++i) {
      m.w[s][i] = mip.add_var("w_" + tag(i) + "_s" + tag(s), VarKind::kContinuous, 0, 1,
                              pi * costs.gamma * scen.demands[s][i]);
      m.u[s][i] = mip.add_var("u_" + tag(i) + "_s" + tag(s), VarKind::kContinuous, 0,
                              lmax, 0.0);
      m.tau[s][i] = mip.add_var("t_" + tag(i) + "_s" + tag(s), VarKind::kContinuous, 0,
                                tbar, 0.0);
    }
  }

  // fleet balance: departures from the DC equal route ends, per type
  for (int p = 0; p < P; ++p) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 1; j <= N; ++j) terms.push_back({m.x[p][0][j], 1.0});
    for (int i = 1; i <= N; ++i) terms.push_back({m.z[i][p], -1.0});
    mip.add_constraint("fleet_balance_" + inst.vehicle_types[p].id, terms,
                       lp::RowSense::kEq, 0.0);
  }
  // flow balance at every demand node, per type
  for (int p = 0; p < P; ++p)
    for (int j = 1; j <= N; ++j) {
      std::vector<std::pair<int, double>> terms;
      for (int i = 0; i <= N; ++i)
        if (i != j) terms.push_back({m.x[p][i][j], 1.0});
      terms.push_back({m.z[j][p], -1.0});
      terms.push_back({m.v[j][p], -1.0});
      mip.add_constraint("inflow_" + inst.vehicle_types[p].id + "_" + tag(j), terms,
                         lp::RowSense::kEq, 0.0);
    }
  for (int p = 0; p < P; ++p)
    for (int i = 1; i <= N; ++i) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 1; j <= N; ++j)
        if (i != j) terms.push_back({m.x[p][i][j], 1.0});
      terms.push_back({m.v[i][p], -1.0});
      mip.add_constraint("outflow_" + inst.vehicle_types[p].id + "_" + tag(i), terms,
                         lp::RowSense::kEq, 0.0);
    }
  // each demand node served by at most one vehicle type
  for (int i = 1; i <= N; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int p = 0; p < P; ++p) {
      terms.push_back({m.z[i][p], 1.0});
      terms.push_back({m.v[i][p], 1.0});
    }
    mip.add_constraint("one_type_" + tag(i), terms, lp::RowSense::kLe, 1.0);
  }

  for (int s = 0; s < S; ++s) {
    // recourse only from visited nodes; the self-service row is kept as its
    // own family even though the neighborhood one already covers i = j
    for (int i = 1; i <= N; ++i) {
      for (int j : nb.out_sets[i]) {
        std::vector<std::pair<int, double>> terms{{m.y[s][i][j], 1.0}};
        for (int p = 0; p < P; ++p) {
          terms.push_back({m.z[i][p], -1.0});
          terms.push_back({m.v[i][p], -1.0});
        }
        mip.add_constraint("reach_s" + tag(s) + "_" + tag(i) + "_" + tag(j), terms,
                           lp::RowSense::kLe, 0.0);
      }
      {
        std::vector<std::pair<int, double>> terms{{m.y[s][i][i], 1.0}};
        for (int p = 0; p < P; ++p) {
          terms.push_back({m.z[i][p], -1.0});
          terms.push_back({m.v[i][p], -1.0});
        }
        mip.add_constraint("own_reach_s" + tag(s) + "_" + tag(i), terms,
                           lp::RowSense::kLe, 0.0);
      }
    }
    // full coverage: served along routes, by recourse, or outsourced
    for (int j = 1; j <= N; ++j) {
      std::vector<std::pair<int, double>> terms;
      for (int i : nb.in_sets[j]) terms.push_back({m.y[s][i][j], 1.0});
      terms.push_back({m.w[s][j], 1.0});
      mip.add_constraint("cover_s" + tag(s) + "_" + tag(j), terms, lp::RowSense::kEq,
                         1.0);
    }
    // cumulative load bounded by the capacity of the serving type
    for (int i = 1; i <= N; ++i) {
      std::vector<std::pair<int, double>> terms{{m.u[s][i], 1.0}};
      for (int p = 0; p < P; ++p) {
        const double slack = lmax - inst.vehicle_types[p].capacity;
        terms.push_back({m.z[i][p], slack});
        terms.push_back({m.v[i][p], slack});
      }
      mip.add_constraint("cap_ub_s" + tag(s) + "_" + tag(i), terms, lp::RowSense::kLe,
                         lmax);
    }
    // load lower bound: everything dispatched from i
    for (int i = 1; i <= N; ++i) {
      std::vector<std::pair<int, double>> terms{{m.u[s][i], -1.0}};
      for (int j : nb.out_sets[i])
        terms.push_back({m.y[s][i][j], scen.demands[s][j]});
      mip.add_constraint("load_lb_s" + tag(s) + "_" + tag(i), terms, lp::RowSense::kLe,
                         0.0);
    }
    // load accumulation along selected arcs
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        if (i == j) continue;
        std::vector<std::pair<int, double>> terms{{m.u[s][i], 1.0}, {m.u[s][j], -1.0}};
        for (int h : nb.out_sets[j])
          terms.push_back({m.y[s][j][h], scen.demands[s][h]});
        for (int p = 0; p < P; ++p) terms.push_back({m.x[p][i][j], lmax});
        mip.add_constraint("load_seq_s" + tag(s) + "_" + tag(i) + "_" + tag(j), terms,
                           lp::RowSense::kLe, lmax);
      }
    // time accumulation along selected arcs, one row per vehicle type so the
    // recourse term carries that type's travel times; the deactivation
    // constant covers the worst recourse load at the target node
    for (int p = 0; p < P; ++p)
      for (int j = 1; j <= N; ++j) {
        double max_rec = 0.0;
        for (int h : nb.out_sets[j])
          max_rec += inst.service_time[j] + costs.beta * inst.travel_time[p][j][h];
        for (int i = 1; i <= N; ++i) {
          if (i == j) continue;
          const double big_m = tbar + max_rec;
          std::vector<std::pair<int, double>> terms{{m.tau[s][i], 1.0},
                                                    {m.tau[s][j], -1.0}};
          terms.push_back({m.x[p][i][j], inst.travel_time[p][i][j] + big_m});
          for (int h : nb.out_sets[j])
            terms.push_back({m.y[s][j][h], inst.service_time[j] +
                                               costs.beta * inst.travel_time[p][j][h]});
          mip.add_constraint("time_seq_s" + tag(s) + "_" + tag(i) + "_" + tag(j) + "_" +
                                 inst.vehicle_types[p].id,
                             terms, lp::RowSense::kLe, big_m);
        }
      }
    // back at the depot before the end of the shift
    for (int i = 1; i <= N; ++i) {
      std::vector<std::pair<int, double>> terms{{m.tau[s][i], 1.0}};
      for (int p = 0; p < P; ++p)
        terms.push_back({m.z[i][p], inst.travel_time[p][i][0]});
      mip.add_constraint("shift_end_s" + tag(s) + "_" + tag(i), terms, lp::RowSense::kLe,
                         tbar);
    }
    if (with_valid_ineq) {
      // selected fleet capacity covers everything actually delivered
      std::vector<std::pair<int, double>> terms;
      for (int i = 1; i <= N; ++i)
        for (int p = 0; p < P; ++p)
          terms.push_back({m.z[i][p], inst.vehicle_types[p].capacity});
      for (int i = 1; i <= N; ++i)
        for (int j : nb.out_sets[i])
          terms.push_back({m.y[s][i][j], -scen.demands[s][j]});
      mip.add_constraint("fleet_cap_s" + tag(s), terms, lp::RowSense::kGe, 0.0);
    }
  }
  mip.validate();
  return m;
}

PathModel build_path_model(const Instance& inst, const ScenarioSet& scen,
                           const Neighborhoods& nb, const CostParams& costs,
                           const RoutePool& pool) {
  validate_instance(inst);
  validate_scenarios(inst, scen);
  if (pool.routes.empty()) throw instance_error("build_path_model: empty pool");
  {
    std::set<int> elementary;
    for (int r : pool.elementary_ids)
      if (pool.routes[r].sequence.size() == 1)
        elementary.insert(pool.routes[r].sequence[0]);
    for (int i = 1; i <= inst.num_demand_nodes(); ++i)
      if (!elementary.count(i))
        throw instance_error("build_path_model: pool missing elementary route for node " +
                             std::to_string(i));
  }

  PathModel m;
  m.pool = pool;
  m.P = inst.num_types();
  m.S = scen.num_scenarios();
  const int R = pool.size(), P = m.P, S = m.S, N = inst.num_demand_nodes();
  const double tbar = inst.shift_limit;
  MipModel& mip = m.mip;

  m.psi.assign(R, std::vector<int>(P, -1));
  for (int r = 0; r < R; ++r) {
    const Route& route = pool.routes[r];
    for (int p : route.feasible_types) {
      const auto& vt = inst.vehicle_types[p];
      m.psi[r][p] = mip.add_var("psi_" + tag(r) + "_" + vt.id, VarKind::kBinary, 0, 1,
                                vt.fixed_cost + vt.unit_distance_cost * route.length);
    }
  }
  m.y.assign(S, std::vector<std::vector<std::tuple<int, int, int>>>(R));
  m.w.assign(S, std::vector<int>(N + 1, -1));
  for (int s = 0; s < S; ++s) {
    const double pi = scenario_term(scen, s);
    for (int r = 0; r < R; ++r)
      for (int i : pool.routes[r].sequence)
        for (int j : nb.out_sets[i]) {
          const int var = mip.add_var(
              "yr_" + tag(i) + "_" + tag(j) + "_" + tag(r) + "_s" + tag(s),
              VarKind::kContinuous, 0, 1, pi * recourse_arc_cost(inst, costs, i, j));
          m.y[s][r].push_back({i, j, var});
        }
    for (int j = 1; j <= N; ++j)
      m.w[s][j] = mip.add_var("w_" + tag(j) + "_s" + tag(s), VarKind::kContinuous, 0, 1,
                              pi * costs.gamma * scen.demands[s][j]);
  }

  // each route selected at most once
  for (int r = 0; r < R; ++r) {
    std::vector<std::pair<int, double>> terms;
    for (int p = 0; p < P; ++p)
      if (m.psi[r][p] >= 0) terms.push_back({m.psi[r][p], 1.0});
    if (!terms.empty())
      mip.add_constraint("route_once_" + tag(r), terms, lp::RowSense::kLe, 1.0);
  }
  // each demand node on at most one selected route
  for (int i = 1; i <= N; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int r = 0; r < R; ++r) {
      const auto& seq = pool.routes[r].sequence;
      if (std::find(seq.begin(), seq.end(), i) == seq.end()) continue;
      for (int p = 0; p < P; ++p)
        if (m.psi[r][p] >= 0) terms.push_back({m.psi[r][p], 1.0});
    }
    if (!terms.empty())
      mip.add_constraint("node_once_" + tag(i), terms, lp::RowSense::kLe, 1.0);
  }

  for (int s = 0; s < S; ++s) {
    // coverage
    std::vector<std::vector<std::pair<int, double>>> cover(N + 1);
    for (int r = 0; r < R; ++r)
      for (const auto& [i, j, var] : m.y[s][r]) cover[j].push_back({var, 1.0});
    for (int j = 1; j <= N; ++j) {
      auto terms = cover[j];
      terms.push_back({m.w[s][j], 1.0});
      mip.add_constraint("cover_s" + tag(s) + "_" + tag(j), terms, lp::RowSense::kEq,
                         1.0);
    }
    for (int r = 0; r < R; ++r) {
      // linking: recourse only from activated routes
      for (const auto& [i, j, var] : m.y[s][r]) {
        std::vector<std::pair<int, double>> terms{{var, 1.0}};
        for (int p = 0; p < P; ++p)
          if (m.psi[r][p] >= 0) terms.push_back({m.psi[r][p], -1.0});
        mip.add_constraint("link_s" + tag(s) + "_r" + tag(r) + "_" + tag(i) + "_" +
                               tag(j),
                           terms, lp::RowSense::kLe, 0.0);
      }
      // capacity of the assigned vehicle bounds everything served via r
      std::vector<std::pair<int, double>> terms;
      for (const auto& [i, j, var] : m.y[s][r])
        terms.push_back({var, scen.demands[s][j]});
      for (int p = 0; p < P; ++p)
        if (m.psi[r][p] >= 0)
          terms.push_back({m.psi[r][p], -inst.vehicle_types[p].capacity});
      if (!terms.empty())
        mip.add_constraint("cap_s" + tag(s) + "_r" + tag(r), terms, lp::RowSense::kLe,
                           0.0);
    }
    // route duration including recourse detours, deactivated for the types
    // not operating the route
    for (int r = 0; r < R; ++r) {
      for (int p : pool.routes[r].feasible_types) {
        const double t_route = pool.routes[r].length / inst.vehicle_types[p].speed;
        double max_rec = 0.0;
        for (const auto& [i, j, var] : m.y[s][r]) {
          (void)var;
          if (i == j) continue;
          max_rec += inst.service_time[j] + costs.beta * inst.travel_time[p][i][j];
        }
        const double big_m = std::max(0.0, t_route + max_rec - tbar) + max_rec;
        std::vector<std::pair<int, double>> terms{{m.psi[r][p], t_route + big_m}};
        for (const auto& [i, j, var] : m.y[s][r]) {
          if (i == j) continue;
          terms.push_back({var, inst.service_time[j] +
                                    costs.beta * inst.travel_time[p][i][j]});
        }
        mip.add_constraint("time_s" + tag(s) + "_r" + tag(r) + "_" +
                               inst.vehicle_types[p].id,
                           terms, lp::RowSense::kLe, tbar + big_m);
      }
    }
  }
  mip.validate();
  return m;
}

namespace {

// First-stage assignment of a plan in node-model terms.
struct FirstStage {
  std::vector<std::vector<int>> z, v;            // [i][p]
  std::vector<std::vector<std::vector<int>>> x;  // [p][i][j]
};

FirstStage plan_to_first_stage(const PlanSolution& plan, int N, int P) {
  FirstStage fs;
  fs.z.assign(N + 1, std::vector<int>(P, 0));
  fs.v.assign(N + 1, std::vector<int>(P, 0));
  fs.x.assign(P, std::vector<std::vector<int>>(N + 1, std::vector<int>(N + 1, 0)));
  for (const auto& pr : plan.routes) {
    const auto& seq = pr.route.sequence;
    const int p = pr.type;
    fs.x[p][0][seq.front()] = 1;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) fs.x[p][seq[k]][seq[k + 1]] = 1;
    fs.z[seq.back()][p] = 1;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) fs.v[seq[k]][p] = 1;
  }
  return fs;
}

}  // namespace

void apply_measure_variant(NodeModel& model, MeasureVariant variant,
                           const PlanSolution& reference) {
  const int N = model.N, P = model.P;
  if (static_cast<int>(reference.fleet.size()) != P)
    throw instance_error("apply_measure_variant: reference fleet size mismatch");
  for (const auto& pr : reference.routes)
    for (int i : pr.route.sequence)
      if (i < 1 || i > N)
        throw instance_error("apply_measure_variant: reference route leaves the instance");

  if (variant == MeasureVariant::kFixFleet || variant == MeasureVariant::kLbFleet) {
    const bool fix = variant == MeasureVariant::kFixFleet;
    for (int p = 0; p < P; ++p) {
      std::vector<std::pair<int, double>> terms;
      for (int i = 1; i <= N; ++i) terms.push_back({model.z[i][p], 1.0});
      model.mip.add_constraint(std::string(fix ? "fleet_fix_" : "fleet_lb_") + tag(p),
                               terms, fix ? lp::RowSense::kEq : lp::RowSense::kGe,
                               reference.fleet[p]);
    }
    return;
  }

  const FirstStage fs = plan_to_first_stage(reference, N, P);
  const bool fix = variant == MeasureVariant::kFixFirstStage;
  auto pin = [&](int var, int value) {
    if (var < 0) return;
    auto& mv = model.mip.variables[var];
    if (fix) {
      mv.lower = mv.upper = value;
    } else if (value == 1) {
      mv.lower = 1.0;
    }
  };
  for (int i = 1; i <= N; ++i)
    for (int p = 0; p < P; ++p) {
      pin(model.z[i][p], fs.z[i][p]);
      pin(model.v[i][p], fs.v[i][p]);
    }
  for (int p = 0; p < P; ++p)
    for (int i = 0; i <= N; ++i)
      for (int j = 1; j <= N; ++j)
        if (i != j) pin(model.x[p][i][j], fs.x[p][i][j]);
}

void apply_measure_variant(PathModel& model, MeasureVariant variant,
                           const PlanSolution& reference) {
  const int P = model.P;
  if (static_cast<int>(reference.fleet.size()) != P)
    throw instance_error("apply_measure_variant: reference fleet size mismatch");

  if (variant == MeasureVariant::kFixFleet || variant == MeasureVariant::kLbFleet) {
    const bool fix = variant == MeasureVariant::kFixFleet;
    for (int p = 0; p < P; ++p) {
      std::vector<std::pair<int, double>> terms;
      for (int r = 0; r < model.pool.size(); ++r)
        if (model.psi[r][p] >= 0) terms.push_back({model.psi[r][p], 1.0});
      model.mip.add_constraint(std::string(fix ? "fleet_fix_" : "fleet_lb_") + tag(p),
                               terms, fix ? lp::RowSense::kEq : lp::RowSense::kGe,
                               reference.fleet[p]);
    }
    return;
  }

  std::map<std::vector<int>, int> by_seq;
  for (int r = 0; r < model.pool.size(); ++r) by_seq[model.pool.routes[r].sequence] = r;
  std::set<int> pinned;
  const bool fix = variant == MeasureVariant::kFixFirstStage;
  for (const auto& pr : reference.routes) {
    auto it = by_seq.find(pr.route.sequence);
    if (it == by_seq.end())
      throw instance_error("apply_measure_variant: reference route not in the pool");
    const int var = model.psi[it->second][pr.type];
    if (var < 0)
      throw instance_error("apply_measure_variant: reference type cannot run the route");
    model.mip.variables[var].lower = 1.0;
    pinned.insert(var);
  }
  if (fix) {
    for (int r = 0; r < model.pool.size(); ++r)
      for (int p = 0; p < P; ++p) {
        const int var = model.psi[r][p];
        if (var < 0 || pinned.count(var)) continue;
        model.mip.variables[var].upper = 0.0;
      }
  }
}

namespace {

PlanCosts recompute_costs(const Instance& inst, const ScenarioSet& scen,
                          const CostParams& costs, const PlanSolution& plan) {
  PlanCosts out;
  for (const auto& pr : plan.routes) {
    out.fixed += inst.vehicle_types[pr.type].fixed_cost;
    out.travel += inst.vehicle_types[pr.type].unit_distance_cost * pr.route.length;
  }
  for (int s = 0; s < scen.num_scenarios(); ++s) {
    const double pi = scen.probabilities[s];
    for (const auto& a : plan.recourse[s])
      out.expected_recourse +=
          pi * recourse_arc_cost(inst, costs, a.origin, a.target) * a.fraction;
    for (int j = 1; j < inst.num_nodes(); ++j)
      out.expected_penalty +=
          pi * costs.gamma * scen.demands[s][j] * plan.unserved[s][j];
  }
  out.total =
      out.fixed + out.travel + out.expected_recourse + out.expected_penalty;
  return out;
}

void reconcile(const PlanSolution& plan, const MipSolution& raw) {
  const double scale = std::max(std::abs(raw.objective), 1.0);
  if (std::abs(plan.costs.total - raw.objective) > 1e-5 * scale)
    throw decode_error("decoded cost " + std::to_string(plan.costs.total) +
                       " does not reconcile with solver objective " +
                       std::to_string(raw.objective));
}

double plan_route_time(const Instance& inst, const CostParams& costs,
                       const PlanSolution& plan, std::size_t k, int scenario,
                       const std::vector<std::vector<double>>& yfrac) {
  const auto& pr = plan.routes[k];
  double t = pr.route.length / inst.vehicle_types[pr.type].speed;
  for (int i : pr.route.sequence)
    for (std::size_t j = 0; j < yfrac[i].size(); ++j) {
      if (static_cast<int>(j) == i) continue;
      if (yfrac[i][j] <= 0.0) continue;
      t += (inst.service_time[j] +
            costs.beta * inst.travel_time[pr.type][i][j]) *
           yfrac[i][j];
    }
  (void)scenario;
  return t;
}

// Shared second-stage copy: fills recourse actions, unserved, loads, times.
void fill_second_stage(PlanSolution& plan, const Instance& inst,
                       const ScenarioSet& scen, const CostParams& costs,
                       const std::vector<std::vector<std::vector<double>>>& y,
                       const std::vector<std::vector<double>>& w) {
  const int S = scen.num_scenarios();
  const int n = inst.num_nodes();
  std::vector<int> route_of(n, -1);
  for (std::size_t k = 0; k < plan.routes.size(); ++k)
    for (int i : plan.routes[k].route.sequence) route_of[i] = static_cast<int>(k);

  plan.recourse.assign(S, {});
  plan.unserved.assign(S, std::vector<double>(n, 0.0));
  plan.route_loads.assign(S, std::vector<double>(plan.routes.size(), 0.0));
  plan.route_times.assign(S, std::vector<double>(plan.routes.size(), 0.0));
  for (int s = 0; s < S; ++s) {
    for (int i = 1; i < n; ++i) {
      plan.unserved[s][i] = w[s][i];
      for (int j = 1; j < n; ++j) {
        const double f = y[s][i][j];
        if (f <= 1e-9) continue;
        plan.recourse[s].push_back({i, j, f});
        if (route_of[i] >= 0)
          plan.route_loads[s][route_of[i]] += scen.demands[s][j] * f;
      }
    }
    for (std::size_t k = 0; k < plan.routes.size(); ++k)
      plan.route_times[s][k] = plan_route_time(inst, costs, plan, k, s, y[s]);
  }
}

}  // namespace

PlanSolution decode_solution(const NodeModel& model, const MipSolution& raw,
                             const Instance& inst, const ScenarioSet& scen,
                             const CostParams& costs) {
  if (!raw.has_incumbent())
    throw decode_error("decode_solution: no incumbent to decode");
  const int N = model.N, P = model.P, S = model.S;
  auto val = [&](int var) { return var < 0 ? 0.0 : raw.values[var]; };
  auto on = [&](int var) { return val(var) > 0.5; };

  PlanSolution plan;
  plan.fleet.assign(P, 0);

  std::vector<int> covered(N + 1, 0);
  for (int p = 0; p < P; ++p) {
    std::vector<int> succ(N + 1, -1);
    std::vector<int> starts;
    int arcs = 0;
    for (int j = 1; j <= N; ++j)
      if (on(model.x[p][0][j])) starts.push_back(j);
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        if (i == j || !on(model.x[p][i][j])) continue;
        if (succ[i] != -1) throw decode_error("node " + tag(i) + " has two successors");
        succ[i] = j;
        ++arcs;
      }
    int used_arcs = 0;
    for (int start : starts) {
      std::vector<int> seq{start};
      int cur = start;
      std::set<int> seen{start};
      while (on(model.v[cur][p])) {
        const int nxt = succ[cur];
        if (nxt < 0)
          throw decode_error("broken flow after node " + tag(cur) +
                             " (no outgoing arc)");
        if (!seen.insert(nxt).second)
          throw decode_error("cycle through node " + tag(nxt));
        seq.push_back(nxt);
        ++used_arcs;
        cur = nxt;
      }
      if (!on(model.z[cur][p]))
        throw decode_error("route does not terminate with a route-end mark at node " +
                           tag(cur));
      for (int i : seq) {
        if (covered[i]++)
          throw decode_error("node " + tag(i) + " appears on two routes");
      }
      PlanRoute pr;
      pr.route = make_route(inst, seq);
      pr.type = p;
      plan.routes.push_back(std::move(pr));
      ++plan.fleet[p];
    }
    if (used_arcs != arcs)
      throw decode_error("dangling arcs of type " + inst.vehicle_types[p].id +
                         " disconnected from the depot");
    for (int i = 1; i <= N; ++i)
      if ((on(model.z[i][p]) || on(model.v[i][p])) && covered[i] == 0)
        throw decode_error("visited node " + tag(i) + " missing from every route");
  }

  std::vector<std::vector<std::vector<double>>> y(
      S, std::vector<std::vector<double>>(N + 1, std::vector<double>(N + 1, 0.0)));
  std::vector<std::vector<double>> w(S, std::vector<double>(N + 1, 0.0));
  for (int s = 0; s < S; ++s) {
    for (int i = 1; i <= N; ++i) {
      for (int j = 1; j <= N; ++j)
        if (model.y[s][i][j] >= 0) y[s][i][j] = val(model.y[s][i][j]);
      w[s][i] = val(model.w[s][i]);
    }
  }
  fill_second_stage(plan, inst, scen, costs, y, w);
  plan.objective = raw.objective;
  plan.costs = recompute_costs(inst, scen, costs, plan);
  reconcile(plan, raw);
  return plan;
}

PlanSolution decode_solution(const PathModel& model, const MipSolution& raw,
                             const Instance& inst, const ScenarioSet& scen,
                             const CostParams& costs) {
  if (!raw.has_incumbent())
    throw decode_error("decode_solution: no incumbent to decode");
  const int S = model.S, P = model.P;
  const int n = inst.num_nodes();
  auto val = [&](int var) { return var < 0 ? 0.0 : raw.values[var]; };

  PlanSolution plan;
  plan.fleet.assign(P, 0);
  std::vector<int> covered(n, 0);
  std::vector<int> route_slot(model.pool.size(), -1);
  for (int r = 0; r < model.pool.size(); ++r)
    for (int p = 0; p < P; ++p) {
      if (model.psi[r][p] < 0 || val(model.psi[r][p]) < 0.5) continue;
      for (int i : model.pool.routes[r].sequence)
        if (covered[i]++)
          throw decode_error("node " + tag(i) + " appears on two selected routes");
      route_slot[r] = static_cast<int>(plan.routes.size());
      plan.routes.push_back({model.pool.routes[r], p});
      ++plan.fleet[p];
    }

  std::vector<std::vector<std::vector<double>>> y(
      S, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
  std::vector<std::vector<double>> w(S, std::vector<double>(n, 0.0));
  for (int s = 0; s < S; ++s) {
    for (int r = 0; r < model.pool.size(); ++r)
      for (const auto& [i, j, var] : model.y[s][r]) {
        const double f = val(var);
        if (f <= 1e-9) continue;
        if (route_slot[r] < 0)
          throw decode_error("recourse assigned to unselected route " + tag(r));
        y[s][i][j] += f;
      }
    for (int j = 1; j < n; ++j) w[s][j] = val(model.w[s][j]);
  }
  fill_second_stage(plan, inst, scen, costs, y, w);
  plan.objective = raw.objective;
  plan.costs = recompute_costs(inst, scen, costs, plan);
  reconcile(plan, raw);
  return plan;
}

RecourseResult evaluate_recourse(const PlanSolution& first_stage, const Instance& inst,
                                 const ScenarioSet& scen, const Neighborhoods& nb,
                                 const CostParams& costs, int scenario_id) {
  const int n = inst.num_nodes();
  const int s = scenario_id;
  const auto& routes = first_stage.routes;

  for (const auto& pr : routes) {
    const double t = pr.route.length / inst.vehicle_types[pr.type].speed;
    if (t > inst.shift_limit + 1e-9)
      throw instance_error("evaluate_recourse: route exceeds the shift at zero recourse");
  }

  lp::LpProblem p;
  // y per (route, origin on route, reachable target); w per node
  struct YVar {
    int route, origin, target, var;
  };
  std::vector<YVar> yvars;
  for (std::size_t k = 0; k < routes.size(); ++k)
    for (int i : routes[k].route.sequence)
      for (int j : nb.out_sets[i]) {
        const int var = p.add_var(0.0, 1.0, recourse_arc_cost(inst, costs, i, j));
        yvars.push_back({static_cast<int>(k), i, j, var});
      }
  std::vector<int> wvar(n, -1);
  for (int j = 1; j < n; ++j)
    wvar[j] = p.add_var(0.0, 1.0, costs.gamma * scen.demands[s][j]);

  std::vector<std::vector<std::pair<int, double>>> cover(n);
  std::vector<std::vector<std::pair<int, double>>> cap(routes.size());
  std::vector<std::vector<std::pair<int, double>>> time(routes.size());
  for (const auto& yv : yvars) {
    cover[yv.target].push_back({yv.var, 1.0});
    cap[yv.route].push_back({yv.var, scen.demands[s][yv.target]});
    if (yv.origin != yv.target) {
      const int ptype = routes[yv.route].type;
      time[yv.route].push_back(
          {yv.var, inst.service_time[yv.target] +
                       costs.beta * inst.travel_time[ptype][yv.origin][yv.target]});
    }
  }
  for (int j = 1; j < n; ++j) {
    auto terms = cover[j];
    terms.push_back({wvar[j], 1.0});
    p.add_row(lp::RowSense::kEq, 1.0, std::move(terms));
  }
  for (std::size_t k = 0; k < routes.size(); ++k) {
    if (!cap[k].empty())
      p.add_row(lp::RowSense::kLe, inst.vehicle_types[routes[k].type].capacity, cap[k]);
    const double t_route = routes[k].route.length / inst.vehicle_types[routes[k].type].speed;
    if (!time[k].empty())
      p.add_row(lp::RowSense::kLe, inst.shift_limit - t_route, time[k]);
  }

  auto res = lp::solve_lp(p);
  if (res.status != lp::LpStatus::kOptimal)
    throw std::runtime_error("evaluate_recourse: LP did not solve");

  RecourseResult out;
  out.unserved.assign(n, 0.0);
  out.route_loads.assign(routes.size(), 0.0);
  out.route_times.assign(routes.size(), 0.0);
  for (std::size_t k = 0; k < routes.size(); ++k)
    out.route_times[k] = routes[k].route.length / inst.vehicle_types[routes[k].type].speed;
  for (const auto& yv : yvars) {
    const double f = res.x[yv.var];
    if (f <= 1e-9) continue;
    out.actions.push_back({yv.origin, yv.target, f});
    out.route_loads[yv.route] += scen.demands[s][yv.target] * f;
    if (yv.origin != yv.target)
      out.route_times[yv.route] +=
          (inst.service_time[yv.target] +
           costs.beta * inst.travel_time[routes[yv.route].type][yv.origin][yv.target]) *
          f;
  }
  for (int j = 1; j < n; ++j) out.unserved[j] = res.x[wvar[j]];
  out.cost = res.objective;
  return out;
}

std::string check_plan(const PlanSolution& plan, const Instance& inst,
                       const ScenarioSet& scen, const Neighborhoods& nb,
                       const CostParams& costs, double tol) {
  (void)costs;
  const int n = inst.num_nodes();
  std::ostringstream err;
  std::vector<int> route_of(n, -1);
  for (std::size_t k = 0; k < plan.routes.size(); ++k) {
    const auto& seq = plan.routes[k].route.sequence;
    std::set<int> uniq(seq.begin(), seq.end());
    if (uniq.size() != seq.size()) return "route with repeated nodes";
    for (int i : seq) {
      if (route_of[i] >= 0) return "node " + tag(i) + " on two routes";
      route_of[i] = static_cast<int>(k);
    }
    const double len = route_length(inst, seq);
    if (std::abs(len - plan.routes[k].route.length) > 1e-9)
      return "route length out of sync with its sequence";
  }
  int fleet_total = 0;
  for (int c : plan.fleet) fleet_total += c;
  if (fleet_total != static_cast<int>(plan.routes.size()))
    return "fleet counts disagree with the route list";

  for (int s = 0; s < scen.num_scenarios(); ++s) {
    std::vector<double> served(n, 0.0);
    for (const auto& a : plan.recourse[s]) {
      served[a.target] += a.fraction;
      if (route_of[a.origin] < 0)
        return "recourse from node " + tag(a.origin) + " which is on no route";
      if (!std::count(nb.out_sets[a.origin].begin(), nb.out_sets[a.origin].end(),
                      a.target))
        return "recourse outside the neighborhood: " + tag(a.origin) + " -> " +
               tag(a.target);
    }
    for (int j = 1; j < n; ++j) {
      const double w = plan.unserved[s][j];
      if (w < -tol || w > 1.0 + tol) return "unserved share outside [0,1]";
      if (std::abs(served[j] + w - 1.0) > tol) {
        err << "coverage identity broken at scenario " << s << " node " << j
            << " (served " << served[j] << ", unserved " << w << ")";
        return err.str();
      }
    }
    for (std::size_t k = 0; k < plan.routes.size(); ++k) {
      const double cap = inst.vehicle_types[plan.routes[k].type].capacity;
      if (plan.route_loads[s][k] > cap + tol)
        return "route load exceeds capacity in scenario " + tag(s);
      if (plan.route_times[s][k] > inst.shift_limit + tol)
        return "route time exceeds the shift limit in scenario " + tag(s);
    }
  }
  return "";
}

}  // namespace fleetmix
