#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fleetmix/simplex.hpp"

namespace fleetmix {

enum class VarKind { kBinary, kContinuous };

struct MipVar {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  double lower = 0.0;
  double upper = 0.0;
};

struct MipConstraint {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  lp::RowSense sense = lp::RowSense::kLe;
  double rhs = 0.0;
};

/// Solver-agnostic MILP container, always a minimization.
struct MipModel {
  std::vector<MipVar> variables;
  std::vector<MipConstraint> constraints;
  std::vector<double> objective;  // one coefficient per variable
  double objective_constant = 0.0;
  std::unordered_map<std::string, int> var_index;

  int add_var(const std::string& name, VarKind kind, double lower, double upper,
              double obj_coeff = 0.0);
  void add_constraint(const std::string& name,
                      std::vector<std::pair<int, double>> terms,
                      lp::RowSense sense, double rhs);
  int index_of(const std::string& name) const;
  int num_vars() const { return static_cast<int>(variables.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  /// Checks the structural invariants (unique names, binary bounds in [0,1],
  /// terms referencing existing variables); throws std::runtime_error.
  void validate() const;
};

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kTimeLimit };

const char* to_string(SolveStatus s);

struct MipSolution {
  std::vector<double> values;
  double objective = 0.0;
  double best_bound = 0.0;
  SolveStatus status = SolveStatus::kInfeasible;
  double gap = 0.0;
  long nodes = 0;
  long lp_iterations = 0;

  bool has_incumbent() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kFeasible;
  }
};

struct SolveLimits {
  double time_s = 1e18;
  double gap = 1e-6;
  /// Known valid upper bound; subtrees with LP bound above it are pruned.
  double cutoff = 1e18;
  long max_nodes = 1000000000L;
};

enum class Backend { kInternal, kMpsExternal };

struct ExternalSolverConfig {
  /// Command template; "{mps}" and "{sol}" expand to the model file and the
  /// expected solution file ("name value" lines). When the placeholders are
  /// absent both paths are appended as arguments.
  std::string command_template;
  std::string work_dir = ".";
};

/// Branch and bound on the binary variables with bounded-variable primal
/// simplex relaxations: best-bound node selection, most-fractional branching
/// (ties by lowest index), incumbents taken from LP-feasible integer points.
MipSolution solve(const MipModel& model, const SolveLimits& limits = {});

/// Writes the model as MPS, runs the configured command and parses the
/// solution file it produces.
MipSolution solve_external(const MipModel& model, const ExternalSolverConfig& cfg,
                           const SolveLimits& limits = {});

MipSolution solve(const MipModel& model, Backend backend, const SolveLimits& limits,
                  const ExternalSolverConfig* external = nullptr);

struct MpsWriteResult {
  std::string text;
  bool free_format = false;  // set when 8-char names would collide
};

/// Fixed-format MPS when every name fits the 8-character field uniquely,
/// free-format otherwise.
MpsWriteResult export_mps(const MipModel& model, const std::string& name = "FLEETMIX");

/// Parses fixed or free MPS (sections NAME/ROWS/COLUMNS/RHS/RANGES/BOUNDS,
/// INTORG/INTEND markers). Inverse of export_mps up to row/column order.
MipModel parse_mps(const std::string& text);

}  // namespace fleetmix
