#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "parm/errors.hpp"

namespace parm {

/// maximize c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ub_matrix;
  Eigen::VectorXd ub_rhs;

  Eigen::Index num_variables() const { return objective.size(); }

  /// Builds an empty program over `n` variables; constraints are appended by the caller.
  static LinearProgram over(Eigen::Index n) {
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(n);
    lp.eq_matrix.resize(0, n);
    lp.ub_matrix.resize(0, n);
    return lp;
  }

  void check_dimensions() const {
    const auto n = num_variables();
    if (eq_matrix.cols() != n || ub_matrix.cols() != n || eq_matrix.rows() != eq_rhs.size() ||
        ub_matrix.rows() != ub_rhs.size())
      throw Error(Errc::DimensionMismatch, "linear program blocks disagree on dimensions");
  }
};

struct LPSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

struct LPOptions {
  int max_iterations = 100000;
  double tol = 1e-9;
};

namespace detail {

// Dense tableau simplex. Rows 0..m-1 are constraints, row m is the reduced-cost row
// (stored as c_j - z_j, so a positive entry means the column improves the objective).
class Tableau {
 public:
  Tableau(Eigen::MatrixXd body, std::vector<int> basis, double tol)
      : t_(std::move(body)), basis_(std::move(basis)), tol_(tol) {}

  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double rhs(Eigen::Index r) const { return t_(r, cols()); }
  const std::vector<int>& basis() const { return basis_; }
  Eigen::MatrixXd& raw() { return t_; }

  void set_costs(const Eigen::VectorXd& c) {
    const auto m = rows();
    t_.row(m).setZero();
    t_.row(m).head(cols()) = c.transpose();
    for (Eigen::Index r = 0; r < m; ++r) {
      const double cb = c(basis_[static_cast<std::size_t>(r)]);
      if (cb != 0.0) t_.row(m) -= cb * t_.row(r);
    }
  }

  double objective_value() const { return -t_(rows(), cols()); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index k = 0; k < t_.rows(); ++k) {
      if (k == r) continue;
      const double factor = t_(k, c);
      if (factor != 0.0) t_.row(k) -= factor * t_.row(r);
      t_(k, c) = 0.0;
    }
    t_(r, c) = 1.0;
    basis_[static_cast<std::size_t>(r)] = static_cast<int>(c);
  }

  void drop_row(Eigen::Index r) {
    const auto last = t_.rows() - 1;
    Eigen::MatrixXd next(t_.rows() - 1, t_.cols());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i <= last; ++i)
      if (i != r) next.row(k++) = t_.row(i);
    t_ = std::move(next);
    basis_.erase(basis_.begin() + r);
  }

  // Runs primal simplex on columns flagged in `allowed`. Returns false if unbounded.
  bool optimize(const std::vector<bool>& allowed, int& iterations, int max_iterations) {
    const auto m = rows();
    int degenerate_streak = 0;
    while (true) {
      if (iterations >= max_iterations) throw Error(Errc::IterationLimit, "simplex iteration cap reached");
      const bool bland = degenerate_streak > 50;
      Eigen::Index enter = -1;
      double best = tol_;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (!allowed[static_cast<std::size_t>(j)]) continue;
        const double rc = t_(m, j);
        if (rc > best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m; ++r) {
        const double a = t_(r, enter);
        if (a <= tol_) continue;
        const double q = rhs(r) / a;
        if (q < ratio - tol_ ||
            (q <= ratio + tol_ && leave >= 0 && basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          ratio = std::min(q, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;
      degenerate_streak = ratio <= tol_ ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  double tol_;
};

}  // namespace detail

/// Two-phase dense simplex. Throws Infeasible, Unbounded or IterationLimit.
inline LPSolution solve_lp(const LinearProgram& lp, const LPOptions& opts = {}) {
  lp.check_dimensions();
  const Eigen::Index n = lp.num_variables();
  const Eigen::Index m_eq = lp.eq_matrix.rows();
  const Eigen::Index m_ub = lp.ub_matrix.rows();
  const Eigen::Index m = m_eq + m_ub;

  // Standard form columns: [original | ub slacks | artificials]. Rows with a
  // nonnegative right-hand side on an inequality start with their slack basic.
  std::vector<Eigen::Index> needs_artificial;
  for (Eigen::Index r = 0; r < m_eq; ++r) needs_artificial.push_back(r);
  for (Eigen::Index r = 0; r < m_ub; ++r)
    if (lp.ub_rhs(r) < 0.0) needs_artificial.push_back(m_eq + r);
  const Eigen::Index n_art = static_cast<Eigen::Index>(needs_artificial.size());
  const Eigen::Index n_std = n + m_ub;
  const Eigen::Index total = n_std + n_art;

  Eigen::MatrixXd body = Eigen::MatrixXd::Zero(m + 1, total + 1);
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  for (Eigen::Index r = 0; r < m_eq; ++r) {
    body.row(r).head(n) = lp.eq_matrix.row(r);
    body(r, total) = lp.eq_rhs(r);
  }
  for (Eigen::Index r = 0; r < m_ub; ++r) {
    body.row(m_eq + r).head(n) = lp.ub_matrix.row(r);
    body(m_eq + r, n + r) = 1.0;
    body(m_eq + r, total) = lp.ub_rhs(r);
    basis[static_cast<std::size_t>(m_eq + r)] = static_cast<int>(n + r);
  }
  for (Eigen::Index k = 0; k < n_art; ++k) {
    const Eigen::Index r = needs_artificial[static_cast<std::size_t>(k)];
    if (body(r, total) < 0.0) body.row(r) *= -1.0;
    body(r, n_std + k) = 1.0;
    basis[static_cast<std::size_t>(r)] = static_cast<int>(n_std + k);
  }

  double scale = 1.0;
  for (Eigen::Index r = 0; r < m; ++r) scale = std::max(scale, std::abs(body(r, total)));
  const double tol = opts.tol;

  detail::Tableau tab(std::move(body), std::move(basis), tol);
  int iterations = 0;

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
    phase1.tail(n_art).setConstant(-1.0);
    tab.set_costs(phase1);
    std::vector<bool> all(static_cast<std::size_t>(total), true);
    tab.optimize(all, iterations, opts.max_iterations);
    if (tab.objective_value() < -1e-7 * scale) throw Error(Errc::Infeasible, "linear program has no feasible point");

    // Drive artificial variables out of the basis; rows where that is impossible are redundant.
    for (Eigen::Index r = tab.rows() - 1; r >= 0; --r) {
      if (tab.basis()[static_cast<std::size_t>(r)] < n_std) continue;
      Eigen::Index col = -1;
      double best = 1e-9;
      for (Eigen::Index j = 0; j < n_std; ++j) {
        if (std::abs(tab.raw()(r, j)) > best) {
          best = std::abs(tab.raw()(r, j));
          col = j;
        }
      }
      if (col >= 0)
        tab.pivot(r, col);
      else
        tab.drop_row(r);
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
  phase2.head(n) = lp.objective;
  tab.set_costs(phase2);
  std::vector<bool> allowed(static_cast<std::size_t>(total), false);
  std::fill(allowed.begin(), allowed.begin() + n_std, true);
  if (!tab.optimize(allowed, iterations, opts.max_iterations))
    throw Error(Errc::Unbounded, "linear program objective is unbounded");

  // Recover the basic solution directly from the original data to shed
  // round-off accumulated in the tableau.
  Eigen::MatrixXd standard = Eigen::MatrixXd::Zero(m, n_std);
  Eigen::VectorXd rhs(m);
  standard.topLeftCorner(m_eq, n) = lp.eq_matrix;
  standard.bottomLeftCorner(m_ub, n) = lp.ub_matrix;
  standard.bottomRightCorner(m_ub, m_ub).setIdentity();
  rhs << lp.eq_rhs, lp.ub_rhs;

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n_std);
  std::vector<Eigen::Index> basic;
  for (Eigen::Index r = 0; r < tab.rows(); ++r) {
    const auto b = tab.basis()[static_cast<std::size_t>(r)];
    z(b) = std::max(0.0, tab.rhs(r));
    basic.push_back(b);
  }
  if (!basic.empty()) {
    Eigen::MatrixXd sb(m, static_cast<Eigen::Index>(basic.size()));
    for (std::size_t k = 0; k < basic.size(); ++k) sb.col(static_cast<Eigen::Index>(k)) = standard.col(basic[k]);
    const Eigen::VectorXd zb = sb.colPivHouseholderQr().solve(rhs);
    Eigen::VectorXd refined = z;
    bool ok = zb.allFinite();
    for (std::size_t k = 0; k < basic.size() && ok; ++k) {
      const double v = zb(static_cast<Eigen::Index>(k));
      if (v < -1e-7 * scale) ok = false;
      refined(basic[k]) = std::max(0.0, v);
    }
    if (ok && (standard * refined - rhs).lpNorm<Eigen::Infinity>() <=
                  (standard * z - rhs).lpNorm<Eigen::Infinity>() + 1e-12)
      z = refined;
  }

  LPSolution sol;
  sol.x = z.head(n);
  sol.objective = lp.objective.dot(sol.x);
  sol.iterations = iterations;
  return sol;
}

}  // namespace parm
