#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace fleetmix::lp {

enum class RowSense { kLe, kEq, kGe };

struct LpRow {
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
};

/// Minimization LP over bounded variables. Bounds may be +-infinity.
struct LpProblem {
  std::vector<double> obj;
  std::vector<double> lb;
  std::vector<double> ub;
  std::vector<LpRow> rows;
  double obj_offset = 0.0;

  int num_vars() const { return static_cast<int>(obj.size()); }

  int add_var(double lower, double upper, double cost) {
    lb.push_back(lower);
    ub.push_back(upper);
    obj.push_back(cost);
    return num_vars() - 1;
  }

  void add_row(RowSense sense, double rhs, std::vector<std::pair<int, double>> terms) {
    rows.push_back(LpRow{sense, rhs, std::move(terms)});
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterLimit;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
  int activation_rounds = 0;
};

struct LpOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  long max_iters = 0;  // 0 = automatic from problem size
  double time_limit_s = 0.0;  // 0 = none; checked between pivots
  /// Inequality rows start inactive and are pulled in only when the current
  /// optimum violatesates them; keeps the working basis small on models whose
  /// big-M/linking rows are mostly slack. Equality rows are always active.
  bool lazy_rows = true;
  /// Optional per-variable bound overrides (same length as problem vars);
  /// used by branch and bound without copying the problem.
  const std::vector<double>* lb_override = nullptr;
  const std::vector<double>* ub_override = nullptr;
  /// In/out: row activity flags (size = rows). On entry seeds the active set;
  /// on exit records the final one. May be null.
  std::vector<std::uint8_t>* active_rows = nullptr;
};

/// Bounded-variable primal simplex (two-phase, revised with explicit basis
/// inverse, Dantzig pricing with Bland fallback). Deterministic: all ties
/// break by lowest index.
LpResult solve_lp(const LpProblem& prob, const LpOptions& opts = {});

}  // namespace fleetmix::lp
