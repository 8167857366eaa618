#include "fleetmix/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace fleetmix {

namespace {
constexpr double kInfty = std::numeric_limits<double>::infinity();
constexpr double kIntTol = 1e-6;  // integrality tolerance

double rel_gap(double objective, double bound) {
  return (objective - bound) / std::max(std::abs(objective), 1e-9);
}
}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kTimeLimit: return "time_limit";
  }
  return "?";
}

int MipModel::add_var(const std::string& name, VarKind kind, double lower,
                      double upper, double obj_coeff) {
  if (var_index.count(name))
    throw std::runtime_error("duplicate variable name: " + name);
  const int idx = num_vars();
  variables.push_back(MipVar{name, kind, lower, upper});
  objective.push_back(obj_coeff);
  var_index.emplace(name, idx);
  return idx;
}

void MipModel::add_constraint(const std::string& name,
                              std::vector<std::pair<int, double>> terms,
                              lp::RowSense sense, double rhs) {
  constraints.push_back(MipConstraint{name, std::move(terms), sense, rhs});
}

int MipModel::index_of(const std::string& name) const {
  auto it = var_index.find(name);
  if (it == var_index.end())
    throw std::runtime_error("unknown variable name: " + name);
  return it->second;
}

void MipModel::validate() const {
  if (var_index.size() != variables.size())
    throw std::runtime_error("variable name index out of sync");
  for (const auto& v : variables) {
    if (v.kind == VarKind::kBinary && (v.lower < 0.0 || v.upper > 1.0))
      throw std::runtime_error("binary variable with bounds outside [0,1]: " + v.name);
    if (v.lower > v.upper)
      throw std::runtime_error("variable with crossed bounds: " + v.name);
  }
  for (const auto& c : constraints)
    for (const auto& [j, coef] : c.terms) {
      (void)coef;
      if (j < 0 || j >= num_vars())
        throw std::runtime_error("constraint " + c.name + " references missing variable");
    }
}

namespace {

lp::LpProblem to_lp(const MipModel& model) {
  lp::LpProblem prob;
  prob.obj = model.objective;
  prob.obj_offset = model.objective_constant;
  prob.lb.reserve(model.num_vars());
  prob.ub.reserve(model.num_vars());
  for (const auto& v : model.variables) {
    prob.lb.push_back(v.lower);
    prob.ub.push_back(v.upper);
  }
  prob.rows.reserve(model.constraints.size());
  for (const auto& c : model.constraints)
    prob.add_row(c.sense, c.rhs, c.terms);
  return prob;
}

struct BnbNode {
  double bound = -kInfty;  // parent LP value (valid lower bound for subtree)
  int depth = 0;
  long id = 0;
  // branching decisions on the path from the root: (var, lower, upper)
  std::vector<std::tuple<int, double, double>> fixes;
  std::vector<int> active_list;  // lazily activated rows inherited from parent
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    if (a.depth != b.depth) return a.depth < b.depth;  // deeper first on ties
    return a.id > b.id;
  }
};

}  // namespace

MipSolution solve(const MipModel& model, const SolveLimits& limits) {
  model.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  auto remaining = [&] { return limits.time_s - elapsed(); };

  lp::LpProblem prob = to_lp(model);
  const int n = model.num_vars();
  std::vector<int> binaries;
  for (int j = 0; j < n; ++j)
    if (model.variables[j].kind == VarKind::kBinary) binaries.push_back(j);

  MipSolution sol;
  sol.best_bound = -kInfty;
  sol.objective = kInfty;

  double incumbent = std::min(limits.cutoff, kInfty);
  bool have_incumbent = false;
  std::vector<double> incumbent_x;
  bool timed_out = false;

  std::vector<double> lb = prob.lb, ub = prob.ub;

  // solves the LP of one node; returns false on a deadline hit
  auto solve_node = [&](const std::vector<std::tuple<int, double, double>>& fixes,
                        std::vector<std::uint8_t>& active, lp::LpResult& out) {
    std::copy(prob.lb.begin(), prob.lb.end(), lb.begin());
    std::copy(prob.ub.begin(), prob.ub.end(), ub.begin());
    for (const auto& [j, lo, hi] : fixes) {
      lb[j] = std::max(lb[j], lo);
      ub[j] = std::min(ub[j], hi);
    }
    lp::LpOptions opts;
    opts.lb_override = &lb;
    opts.ub_override = &ub;
    opts.active_rows = &active;
    opts.time_limit_s = std::max(0.05, remaining());
    out = lp::solve_lp(prob, opts);
    ++sol.nodes;
    sol.lp_iterations += out.iterations;
    if (out.status == lp::LpStatus::kIterLimit) {
      timed_out = true;
      return false;
    }
    if (out.status == lp::LpStatus::kUnbounded)
      throw std::runtime_error("relaxation unbounded; the model is not boxed");
    return true;
  };

  auto most_fractional = [&](const std::vector<double>& x) {
    int var = -1;
    double best_frac = kIntTol;
    for (int j : binaries) {
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > best_frac + 1e-15) {
        best_frac = dist;
        var = j;
      }
    }
    return var;
  };

  auto try_incumbent = [&](double bound, const std::vector<double>& x) {
    if (bound >= incumbent - 1e-12) return;
    incumbent = bound;
    have_incumbent = true;
    incumbent_x = x;
    for (int j : binaries) incumbent_x[j] = std::round(incumbent_x[j]);
  };

  // initial plunge: depth-first rounding descent to secure a first incumbent
  // before the best-bound phase (its nodes are re-derived later; only the
  // incumbent is kept)
  double root_bound = -kInfty;
  std::vector<std::uint8_t> root_active(prob.rows.size(), 0);
  {
    std::vector<std::tuple<int, double, double>> fixes;
    std::vector<std::uint8_t> active(prob.rows.size(), 0);
    for (std::size_t depth = 0; depth <= binaries.size(); ++depth) {
      if (remaining() <= 0.0) {
        timed_out = true;
        break;
      }
      lp::LpResult lpres;
      if (!solve_node(fixes, active, lpres)) break;
      if (lpres.status == lp::LpStatus::kInfeasible) break;
      if (depth == 0) {
        root_bound = lpres.objective;
        root_active = active;
      }
      if (lpres.objective >= incumbent - 1e-12) break;  // cutoff-dominated
      const int var = most_fractional(lpres.x);
      if (var < 0) {
        try_incumbent(lpres.objective, lpres.x);
        break;
      }
      const double side = lpres.x[var] >= 0.5 ? 1.0 : 0.0;
      fixes.emplace_back(var, side, side);
    }
  }

  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
  long next_id = 0;
  if (!timed_out && root_bound > -kInfty) {
    BnbNode root;
    root.id = next_id++;
    root.bound = root_bound;
    std::vector<int> root_list;
    for (std::size_t r = 0; r < root_active.size(); ++r)
      if (root_active[r]) root_list.push_back(static_cast<int>(r));
    root.active_list = std::move(root_list);
    open.push(std::move(root));
  } else if (!timed_out) {
    // root LP infeasible
    sol.status = SolveStatus::kInfeasible;
    sol.objective = kInfty;
    sol.best_bound = kInfty;
    sol.gap = kInfty;
    return sol;
  }

  while (!open.empty()) {
    if (elapsed() > limits.time_s || sol.nodes >= limits.max_nodes) {
      timed_out = true;
      break;
    }
    BnbNode node = open.top();
    open.pop();
    // the queue is bound-ordered, so the popped bound is the global bound
    sol.best_bound = std::max(sol.best_bound, node.bound);
    if (incumbent < kInfty &&
        (sol.best_bound >= incumbent - 1e-12 ||
         rel_gap(incumbent, sol.best_bound) <= limits.gap)) {
      sol.best_bound = std::min(sol.best_bound, incumbent);
      break;
    }

    std::vector<std::uint8_t> active(prob.rows.size(), 0);
    for (int r : node.active_list) active[r] = 1;
    lp::LpResult lpres;
    if (!solve_node(node.fixes, active, lpres)) break;
    if (lpres.status == lp::LpStatus::kInfeasible) continue;
    const double bound = lpres.objective;
    if (incumbent < kInfty && (bound >= incumbent - 1e-12 ||
                               rel_gap(incumbent, bound) <= limits.gap))
      continue;  // dominated subtree

    const int branch_var = most_fractional(lpres.x);
    if (branch_var < 0) {
      try_incumbent(bound, lpres.x);
      continue;
    }

    std::vector<int> active_list;
    for (std::size_t r = 0; r < active.size(); ++r)
      if (active[r]) active_list.push_back(static_cast<int>(r));

    BnbNode down, up;
    down.fixes = node.fixes;
    down.fixes.emplace_back(branch_var, 0.0, 0.0);
    up.fixes = std::move(node.fixes);
    up.fixes.emplace_back(branch_var, 1.0, 1.0);
    down.bound = up.bound = bound;
    down.depth = up.depth = node.depth + 1;
    down.active_list = active_list;
    up.active_list = std::move(active_list);
    down.id = next_id++;
    up.id = next_id++;
    // explore the rounded side first on equal bounds
    if (lpres.x[branch_var] >= 0.5) up.depth += 1;
    else down.depth += 1;
    open.push(std::move(down));
    open.push(std::move(up));
  }

  if (open.empty() && !timed_out)
    sol.best_bound = have_incumbent ? incumbent : kInfty;

  if (!have_incumbent) {
    sol.status = timed_out ? SolveStatus::kTimeLimit : SolveStatus::kInfeasible;
    sol.objective = kInfty;
    sol.gap = kInfty;
    return sol;
  }
  sol.values = std::move(incumbent_x);
  sol.objective = incumbent;
  sol.best_bound = std::min(sol.best_bound, sol.objective);
  sol.gap = std::max(0.0, rel_gap(sol.objective, sol.best_bound));
  if (timed_out && sol.gap > limits.gap)
    sol.status = SolveStatus::kTimeLimit;
  else if (sol.gap <= std::max(limits.gap, 1e-6) + 1e-12)
    sol.status = SolveStatus::kOptimal;
  else
    sol.status = SolveStatus::kFeasible;
  return sol;
}

MipSolution solve_external(const MipModel& model, const ExternalSolverConfig& cfg,
                           const SolveLimits& limits) {
  (void)limits;
  model.validate();
  if (cfg.command_template.empty())
    throw std::runtime_error("external solver command not configured");

  const std::string mps_path = cfg.work_dir + "/fleetmix_model.mps";
  const std::string sol_path = cfg.work_dir + "/fleetmix_model.sol";
  {
    std::ofstream out(mps_path);
    if (!out) throw std::runtime_error("cannot write " + mps_path);
    out << export_mps(model).text;
  }
  std::remove(sol_path.c_str());

  std::string cmd = cfg.command_template;
  auto substitute = [&cmd](const std::string& key, const std::string& value) {
    bool found = false;
    for (std::size_t pos = cmd.find(key); pos != std::string::npos;
         pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
      found = true;
    }
    return found;
  };
  const bool has_mps = substitute("{mps}", mps_path);
  const bool has_sol = substitute("{sol}", sol_path);
  if (!has_mps || !has_sol) cmd += " " + mps_path + " " + sol_path;

  const int rc = std::system(cmd.c_str());
  std::ifstream in(sol_path);
  if (rc != 0 || !in)
    throw std::runtime_error("external solver failed (command: " + cmd + ")");

  MipSolution sol;
  sol.values.assign(model.num_vars(), 0.0);
  std::string name;
  double value;
  while (in >> name >> value) {
    auto it = model.var_index.find(name);
    if (it != model.var_index.end()) sol.values[it->second] = value;
  }
  sol.objective = model.objective_constant;
  for (int j = 0; j < model.num_vars(); ++j)
    sol.objective += model.objective[j] * sol.values[j];
  sol.best_bound = sol.objective;
  sol.gap = 0.0;
  sol.status = SolveStatus::kOptimal;
  return sol;
}

MipSolution solve(const MipModel& model, Backend backend, const SolveLimits& limits,
                  const ExternalSolverConfig* external) {
  if (backend == Backend::kInternal) return solve(model, limits);
  if (!external)
    throw std::runtime_error("mps_external backend requires a solver command");
  return solve_external(model, *external, limits);
}

}  // namespace fleetmix
