#include "fleetmix/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace fleetmix::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-9;

enum VarState : std::uint8_t { kAtLower, kAtUpper, kBasic, kFreeNb };

using Clock = std::chrono::steady_clock;

// Equality system min c'x, A x = b over the active rows, with slacks and
// (where the initial slack basis cannot absorb the residual) artificials.
class Core {
 public:
  Core(const LpProblem& prob, const LpOptions& opts,
       const std::vector<int>& active, Clock::time_point deadline)
      : prob_(prob), opts_(opts), active_(active), deadline_(deadline) {
    n_ = prob.num_vars();
    m_ = static_cast<int>(active.size());
    build();
  }

  LpStatus run(long max_iters, long* iters_used) {
    long it = 0;
    if (have_artificials_) {
      LpStatus s1 = simplex(phase1_cost_, max_iters, &it);
      if (s1 == LpStatus::kIterLimit) {
        *iters_used = it;
        return s1;
      }
      double infeas = 0.0;
      for (int j = art_begin_; j < total_; ++j) infeas += xval_[j];
      if (infeas > 1e-7) {
        *iters_used = it;
        return LpStatus::kInfeasible;
      }
      for (int j = art_begin_; j < total_; ++j) ub_[j] = 0.0;
      recompute_basics();
    }
    long it2 = 0;
    LpStatus s2 = simplex(cost_, max_iters - it, &it2);
    *iters_used = it + it2;
    return s2;
  }

  void extract(std::vector<double>& x) const {
    x.assign(xval_.begin(), xval_.begin() + n_);
  }

 private:
  const LpProblem& prob_;
  const LpOptions& opts_;
  const std::vector<int>& active_;
  Clock::time_point deadline_;
  int n_ = 0, m_ = 0, total_ = 0, art_begin_ = 0;
  bool have_artificials_ = false;

  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lb_, ub_, cost_, phase1_cost_, rhs_, xval_;
  std::vector<std::uint8_t> state_;
  std::vector<int> basis_;
  std::vector<std::vector<double>> binv_;  // row-major m x m

  double elb(int j) const {
    if (j < n_ && opts_.lb_override) return (*opts_.lb_override)[j];
    return lb_[j];
  }
  double eub(int j) const {
    if (j < n_ && opts_.ub_override) return (*opts_.ub_override)[j];
    return ub_[j];
  }

  void build() {
    cols_.assign(n_, {});
    lb_ = prob_.lb;
    ub_ = prob_.ub;
    cost_ = prob_.obj;
    rhs_.resize(m_);
    for (int k = 0; k < m_; ++k) {
      const LpRow& row = prob_.rows[active_[k]];
      rhs_[k] = row.rhs;
      for (const auto& [j, v] : row.terms) cols_[j].emplace_back(k, v);
    }
    // slack per active row
    for (int k = 0; k < m_; ++k) {
      const RowSense s = prob_.rows[active_[k]].sense;
      double lo = 0.0, hi = 0.0;
      if (s == RowSense::kLe) hi = kInf;
      if (s == RowSense::kGe) lo = -kInf;
      cols_.push_back({{k, 1.0}});
      lb_.push_back(lo);
      ub_.push_back(hi);
      cost_.push_back(0.0);
    }
    total_ = n_ + m_;
    art_begin_ = total_;

    // nonbasic start: every structural at the finite bound nearest zero
    xval_.assign(total_, 0.0);
    state_.assign(total_, kAtLower);
    for (int j = 0; j < n_; ++j) {
      const double lo = elb(j), hi = eub(j);
      if (lo > -kInf && hi < kInf) {
        if (std::abs(lo) <= std::abs(hi)) {
          xval_[j] = lo;
          state_[j] = kAtLower;
        } else {
          xval_[j] = hi;
          state_[j] = kAtUpper;
        }
      } else if (lo > -kInf) {
        xval_[j] = lo;
        state_[j] = kAtLower;
      } else if (hi < kInf) {
        xval_[j] = hi;
        state_[j] = kAtUpper;
      } else {
        xval_[j] = 0.0;
        state_[j] = kFreeNb;
      }
    }

    // residuals decide which rows need an artificial
    std::vector<double> resid = rhs_;
    for (int j = 0; j < n_; ++j) {
      if (xval_[j] == 0.0) continue;
      for (const auto& [k, v] : cols_[j]) resid[k] -= v * xval_[j];
    }
    basis_.assign(m_, -1);
    binv_.assign(m_, std::vector<double>(m_, 0.0));
    for (int k = 0; k < m_; ++k) {
      const int sj = n_ + k;
      const double r = resid[k];
      if (r >= lb_[sj] && r <= ub_[sj]) {
        basis_[k] = sj;
        state_[sj] = kBasic;
        xval_[sj] = r;
        binv_[k][k] = 1.0;
      } else {
        const double sval = std::clamp(r, lb_[sj], ub_[sj]);
        xval_[sj] = sval;
        state_[sj] = (sval == ub_[sj] && ub_[sj] < kInf) ? kAtUpper : kAtLower;
        const double gap = r - sval;
        const double sigma = gap >= 0.0 ? 1.0 : -1.0;
        cols_.push_back({{k, sigma}});
        lb_.push_back(0.0);
        ub_.push_back(kInf);
        cost_.push_back(0.0);
        xval_.push_back(std::abs(gap));
        state_.push_back(kBasic);
        basis_[k] = static_cast<int>(cols_.size()) - 1;
        binv_[k][k] = sigma;  // inverse of the 1x1 pivot
        have_artificials_ = true;
      }
    }
    total_ = static_cast<int>(cols_.size());
    if (have_artificials_) {
      phase1_cost_.assign(total_, 0.0);
      for (int j = art_begin_; j < total_; ++j) phase1_cost_[j] = 1.0;
      cost_.resize(total_, 0.0);
    }
  }

  double bound_of(int j, bool upper) const { return upper ? eub(j) : elb(j); }

  // x_B = binv * (b - N x_N); also snaps nonbasics exactly to their bounds.
  void recompute_basics() {
    std::vector<double> r = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == kBasic) continue;
      if (state_[j] == kAtLower) xval_[j] = elb(j);
      if (state_[j] == kAtUpper) xval_[j] = eub(j);
      if (xval_[j] == 0.0) continue;
      for (const auto& [k, v] : cols_[j]) r[k] -= v * xval_[j];
    }
    for (int k = 0; k < m_; ++k) {
      double acc = 0.0;
      const auto& row = binv_[k];
      for (int i = 0; i < m_; ++i) acc += row[i] * r[i];
      xval_[basis_[k]] = acc;
    }
  }

  // Dense re-inversion of the current basis (Gauss-Jordan, partial pivoting).
  bool refactor() {
    std::vector<std::vector<double>> a(m_, std::vector<double>(m_, 0.0));
    for (int k = 0; k < m_; ++k)
      for (const auto& [row, v] : cols_[basis_[k]]) a[row][k] += v;
    std::vector<std::vector<double>> inv(m_, std::vector<double>(m_, 0.0));
    for (int i = 0; i < m_; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = -1;
      double best = 1e-12;
      for (int row = col; row < m_; ++row)
        if (std::abs(a[row][col]) > best) {
          best = std::abs(a[row][col]);
          piv = row;
        }
      if (piv < 0) return false;
      std::swap(a[piv], a[col]);
      std::swap(inv[piv], inv[col]);
      const double d = a[col][col];
      for (int i = 0; i < m_; ++i) {
        a[col][i] /= d;
        inv[col][i] /= d;
      }
      for (int row = 0; row < m_; ++row) {
        if (row == col) continue;
        const double f = a[row][col];
        if (f == 0.0) continue;
        for (int i = 0; i < m_; ++i) {
          a[row][i] -= f * a[col][i];
          inv[row][i] -= f * inv[col][i];
        }
      }
    }
    // binv = inv applied in basis order: rows of inv map basis slots
    binv_ = std::move(inv);
    recompute_basics();
    return true;
  }

  LpStatus simplex(const std::vector<double>& cost, long max_iters, long* iters) {
    std::vector<double> y(m_), w(m_);
    long stall = 0;
    bool bland = false;  // sticky once triggered: guarantees termination
    long since_refactor = 0;
    for (long iter = 0; iter < max_iters; ++iter) {
      *iters = iter + 1;
      if ((iter & 127) == 0 && Clock::now() > deadline_)
        return LpStatus::kIterLimit;
      // BTRAN: y = c_B' binv
      std::fill(y.begin(), y.end(), 0.0);
      for (int k = 0; k < m_; ++k) {
        const double cb = cost[basis_[k]];
        if (cb == 0.0) continue;
        const auto& row = binv_[k];
        for (int i = 0; i < m_; ++i) y[i] += cb * row[i];
      }
      // pricing
      int q = -1;
      double best_viol = opts_.opt_tol;
      double dq = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == kBasic) continue;
        const double lo = elb(j), hi = eub(j);
        if (lo == hi) continue;  // fixed
        double d = cost[j];
        for (const auto& [k, v] : cols_[j]) d -= y[k] * v;
        double viol;
        if (state_[j] == kAtLower)
          viol = -d;
        else if (state_[j] == kAtUpper)
          viol = d;
        else
          viol = std::abs(d);
        if (viol > best_viol) {
          q = j;
          dq = d;
          best_viol = viol;
          if (bland) break;  // first eligible index
        }
      }
      if (q < 0) return LpStatus::kOptimal;

      const double dir =
          (state_[q] == kAtLower || (state_[q] == kFreeNb && dq < 0.0)) ? 1.0 : -1.0;
      // FTRAN: w = binv * a_q
      const auto& qcol = cols_[q];
      for (int row = 0; row < m_; ++row) {
        const auto& brow = binv_[row];
        double acc = 0.0;
        for (const auto& [k, v] : qcol) acc += brow[k] * v;
        w[row] = acc;
      }

      // ratio test, pass 1: minimal blocking step
      double t_flip = kInf;
      if (elb(q) > -kInf && eub(q) < kInf) t_flip = eub(q) - elb(q);
      double t_min = t_flip;
      for (int k = 0; k < m_; ++k) {
        const double wk = dir * w[k];
        if (std::abs(wk) <= kPivotTol) continue;
        const int bk = basis_[k];
        double t;
        if (wk > 0.0) {
          const double lo = elb(bk);
          if (lo == -kInf) continue;
          t = (xval_[bk] - lo) / wk;
        } else {
          const double hi = eub(bk);
          if (hi == kInf) continue;
          t = (xval_[bk] - hi) / wk;
        }
        if (t < 0.0) t = 0.0;
        if (t < t_min) t_min = t;
      }
      if (t_min == kInf) return LpStatus::kUnbounded;

      // pass 2: among blockers within the tie window pick the largest pivot
      // (lowest variable index under Bland's rule while stalled)
      int leave = -1;
      bool leave_upper = false;
      double piv_mag = 0.0;
      for (int k = 0; k < m_; ++k) {
        const double wk = dir * w[k];
        if (std::abs(wk) <= kPivotTol) continue;
        const int bk = basis_[k];
        double t;
        bool hits_upper;
        if (wk > 0.0) {
          const double lo = elb(bk);
          if (lo == -kInf) continue;
          t = (xval_[bk] - lo) / wk;
          hits_upper = false;
        } else {
          const double hi = eub(bk);
          if (hi == kInf) continue;
          t = (xval_[bk] - hi) / wk;
          hits_upper = true;
        }
        if (t < 0.0) t = 0.0;
        if (t > t_min + kRatioTieTol) continue;
        if (bland) {
          if (leave < 0 || bk < basis_[leave]) {
            leave = k;
            leave_upper = hits_upper;
          }
        } else if (std::abs(w[k]) > piv_mag) {
          piv_mag = std::abs(w[k]);
          leave = k;
          leave_upper = hits_upper;
        }
      }

      const double step = (leave < 0) ? t_flip : std::max(0.0, t_min);
      // apply step
      if (step != 0.0) {
        for (int k = 0; k < m_; ++k)
          if (w[k] != 0.0) xval_[basis_[k]] -= dir * step * w[k];
        xval_[q] += dir * step;
      }
      if (leave < 0) {
        state_[q] = (dir > 0.0) ? kAtUpper : kAtLower;
        xval_[q] = (dir > 0.0) ? eub(q) : elb(q);
      } else {
        const int lv = basis_[leave];
        state_[lv] = leave_upper ? kAtUpper : kAtLower;
        xval_[lv] = leave_upper ? eub(lv) : elb(lv);
        basis_[leave] = q;
        state_[q] = kBasic;
        // inverse update: pivot on w[leave]
        const double piv = w[leave];
        auto& prow = binv_[leave];
        const double inv_piv = 1.0 / piv;
        for (int i = 0; i < m_; ++i) prow[i] *= inv_piv;
        for (int k = 0; k < m_; ++k) {
          if (k == leave || w[k] == 0.0) continue;
          const double f = w[k];
          auto& krow = binv_[k];
          for (int i = 0; i < m_; ++i) krow[i] -= f * prow[i];
        }
        ++since_refactor;
      }

      if (step <= 1e-11) {
        if (++stall > m_ + 300) bland = true;
      } else {
        stall = 0;
      }
      if (since_refactor >= 4000) {
        refactor();
        since_refactor = 0;
      }
    }
    return LpStatus::kIterLimit;
  }
};

double row_violation(const LpRow& row, const std::vector<double>& x) {
  double lhs = 0.0;
  for (const auto& [j, v] : row.terms) lhs += v * x[j];
  switch (row.sense) {
    case RowSense::kLe:
      return lhs - row.rhs;
    case RowSense::kGe:
      return row.rhs - lhs;
    case RowSense::kEq:
      return std::abs(lhs - row.rhs);
  }
  return 0.0;
}

}  // namespace

LpResult solve_lp(const LpProblem& prob, const LpOptions& opts) {
  LpResult res;
  const int n = prob.num_vars();
  const int nrows = static_cast<int>(prob.rows.size());

  // infeasible bound boxes short-circuit (branching can produce them)
  for (int j = 0; j < n; ++j) {
    const double lo = opts.lb_override ? (*opts.lb_override)[j] : prob.lb[j];
    const double hi = opts.ub_override ? (*opts.ub_override)[j] : prob.ub[j];
    if (lo > hi + 1e-12) {
      res.status = LpStatus::kInfeasible;
      return res;
    }
  }

  std::vector<std::uint8_t> active(nrows, 0);
  if (opts.active_rows && static_cast<int>(opts.active_rows->size()) == nrows)
    active = *opts.active_rows;
  if (opts.lazy_rows) {
    for (int r = 0; r < nrows; ++r)
      if (prob.rows[r].sense == RowSense::kEq) active[r] = 1;
  } else {
    std::fill(active.begin(), active.end(), 1);
  }

  const long iter_cap =
      opts.max_iters > 0 ? opts.max_iters : 50000L + 200L * (n + nrows);
  const auto deadline =
      opts.time_limit_s > 0.0
          ? Clock::now() + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(opts.time_limit_s))
          : Clock::time_point::max();

  bool forced_all = false;
  for (int round = 0; round < 200; ++round) {
    res.activation_rounds = round + 1;
    std::vector<int> act;
    act.reserve(nrows);
    for (int r = 0; r < nrows; ++r)
      if (active[r]) act.push_back(r);

    Core core(prob, opts, act, deadline);
    long used = 0;
    LpStatus st = core.run(iter_cap - res.iterations, &used);
    res.iterations += used;
    if (st == LpStatus::kInfeasible) {
      // a row subset is a relaxation, so subset infeasibility is conclusive
      res.status = LpStatus::kInfeasible;
      return res;
    }
    if (st == LpStatus::kIterLimit) {
      res.status = st;
      return res;
    }
    if (st == LpStatus::kUnbounded) {
      if (forced_all || act.size() == static_cast<std::size_t>(nrows)) {
        res.status = LpStatus::kUnbounded;
        return res;
      }
      std::fill(active.begin(), active.end(), 1);
      forced_all = true;
      continue;
    }
    core.extract(res.x);
    bool any_violated = false;
    for (int r = 0; r < nrows; ++r) {
      if (active[r]) continue;
      if (row_violation(prob.rows[r], res.x) > opts.feas_tol) {
        active[r] = 1;
        any_violated = true;
      }
    }
    if (!any_violated) {
      res.status = LpStatus::kOptimal;
      res.objective = prob.obj_offset;
      for (int j = 0; j < n; ++j) res.objective += prob.obj[j] * res.x[j];
      if (opts.active_rows) *opts.active_rows = active;
      return res;
    }
  }
  res.status = LpStatus::kIterLimit;
  return res;
}

}  // namespace fleetmix::lp
