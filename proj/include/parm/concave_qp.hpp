#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "parm/errors.hpp"
#include "parm/linear_program.hpp"

namespace parm {

/// One concave aggregate term: curvature * (sum_k coef_k * v_k)^2, curvature <= 0.
struct QuadraticTerm {
  std::vector<std::pair<Eigen::Index, double>> coefficients;
  double curvature = 0.0;
  std::string label;

  double evaluate_form(const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (const auto& [k, c] : coefficients) s += c * v(k);
    return s;
  }
};

/// maximize constant + linear'v + sum_t curvature_t (a_t'v)^2
/// s.t. eq_matrix v = eq_rhs, ub_matrix v <= ub_rhs, v >= 0, v_k = 0 for pinned k.
struct QuadraticProgram {
  std::vector<std::string> variable_names;
  Eigen::VectorXd linear;
  double constant = 0.0;
  std::vector<QuadraticTerm> quadratic;

  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  std::vector<std::string> eq_labels;
  Eigen::MatrixXd ub_matrix;
  Eigen::VectorXd ub_rhs;
  std::vector<std::string> ub_labels;
  std::vector<Eigen::Index> pinned_zero;

  static QuadraticProgram over(std::vector<std::string> names) {
    QuadraticProgram qp;
    const auto n = static_cast<Eigen::Index>(names.size());
    qp.variable_names = std::move(names);
    qp.linear = Eigen::VectorXd::Zero(n);
    qp.eq_matrix.resize(0, n);
    qp.ub_matrix.resize(0, n);
    return qp;
  }

  Eigen::Index num_variables() const { return linear.size(); }

  void add_eq(const Eigen::RowVectorXd& row, double rhs, std::string label) {
    append(eq_matrix, eq_rhs, row, rhs);
    eq_labels.push_back(std::move(label));
  }

  void add_ub(const Eigen::RowVectorXd& row, double rhs, std::string label) {
    append(ub_matrix, ub_rhs, row, rhs);
    ub_labels.push_back(std::move(label));
  }

  bool is_concave() const {
    return std::all_of(quadratic.begin(), quadratic.end(), [](const auto& t) { return t.curvature <= 0.0; });
  }

  double objective(const Eigen::VectorXd& v) const {
    double q = constant + linear.dot(v);
    for (const auto& t : quadratic) {
      const double a = t.evaluate_form(v);
      q += t.curvature * a * a;
    }
    return q;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& v) const {
    Eigen::VectorXd g = linear;
    for (const auto& t : quadratic) {
      const double a = t.evaluate_form(v);
      for (const auto& [k, c] : t.coefficients) g(k) += 2.0 * t.curvature * a * c;
    }
    return g;
  }

  /// sum_t curvature_t (a_t'd)^2: half the second directional derivative along d.
  double curvature_along(const Eigen::VectorXd& d) const {
    double s = 0.0;
    for (const auto& t : quadratic) {
      const double a = t.evaluate_form(d);
      s += t.curvature * a * a;
    }
    return s;
  }

  /// Dense Hessian of the objective (negative semidefinite).
  Eigen::MatrixXd hessian() const {
    const auto n = num_variables();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : quadratic)
      for (const auto& [i, ci] : t.coefficients)
        for (const auto& [j, cj] : t.coefficients) h(i, j) += 2.0 * t.curvature * ci * cj;
    return h;
  }

  /// Largest violation over all constraint families, including nonnegativity.
  double feasibility_residual(const Eigen::VectorXd& v) const {
    double r = 0.0;
    if (eq_matrix.rows() > 0) r = std::max(r, (eq_matrix * v - eq_rhs).lpNorm<Eigen::Infinity>());
    if (ub_matrix.rows() > 0) r = std::max(r, std::max(0.0, (ub_matrix * v - ub_rhs).maxCoeff()));
    if (v.size() > 0) r = std::max(r, std::max(0.0, -v.minCoeff()));
    for (auto k : pinned_zero) r = std::max(r, std::abs(v(k)));
    return r;
  }

  /// The feasible polytope with a linear objective, as a linear program.
  LinearProgram linearization(const Eigen::VectorXd& objective_coefficients) const {
    LinearProgram lp = LinearProgram::over(num_variables());
    lp.objective = objective_coefficients;
    const auto pins = static_cast<Eigen::Index>(pinned_zero.size());
    lp.eq_matrix = Eigen::MatrixXd::Zero(eq_matrix.rows() + pins, num_variables());
    lp.eq_rhs = Eigen::VectorXd::Zero(eq_matrix.rows() + pins);
    lp.eq_matrix.topRows(eq_matrix.rows()) = eq_matrix;
    lp.eq_rhs.head(eq_rhs.size()) = eq_rhs;
    for (Eigen::Index k = 0; k < pins; ++k) lp.eq_matrix(eq_matrix.rows() + k, pinned_zero[static_cast<std::size_t>(k)]) = 1.0;
    lp.ub_matrix = ub_matrix;
    lp.ub_rhs = ub_rhs;
    return lp;
  }

 private:
  static void append(Eigen::MatrixXd& m, Eigen::VectorXd& rhs, const Eigen::RowVectorXd& row, double value) {
    if (row.size() != m.cols()) throw Error(Errc::DimensionMismatch, "constraint row has wrong width");
    m.conservativeResize(m.rows() + 1, Eigen::NoChange);
    m.row(m.rows() - 1) = row;
    rhs.conservativeResize(rhs.size() + 1);
    rhs(rhs.size() - 1) = value;
  }
};

struct QPOptions {
  double tol = 1e-8;            // relative Frank-Wolfe gap
  int max_iterations = 100000;
  // Frank-Wolfe runs to this looser gap (or iteration count) before the
  // active-set polish; the polish lands on an exact KKT point.
  double warmup_tol = 1e-5;
  int warmup_iterations = 400;
  bool polish = true;
  std::ostream* trace = nullptr;  // one line per iterate: iteration objective gap
};

struct QPSolution {
  Eigen::VectorXd values;
  double objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool polished = false;
};

namespace detail {

struct StandardForm {
  Eigen::MatrixXd a;  // rows: eq, ub (with slack), pins
  Eigen::VectorXd b;
  Eigen::MatrixXd g_hess;  // PSD Hessian of the minimization objective
  Eigen::VectorXd g_lin;
  Eigen::Index n_orig = 0;
};

inline StandardForm to_standard_form(const QuadraticProgram& qp) {
  StandardForm sf;
  const auto n = qp.num_variables();
  const auto m_eq = qp.eq_matrix.rows();
  const auto m_ub = qp.ub_matrix.rows();
  const auto pins = static_cast<Eigen::Index>(qp.pinned_zero.size());
  const auto cols = n + m_ub;
  sf.n_orig = n;
  sf.a = Eigen::MatrixXd::Zero(m_eq + m_ub + pins, cols);
  sf.b = Eigen::VectorXd::Zero(m_eq + m_ub + pins);
  sf.a.topLeftCorner(m_eq, n) = qp.eq_matrix;
  sf.b.head(m_eq) = qp.eq_rhs;
  sf.a.block(m_eq, 0, m_ub, n) = qp.ub_matrix;
  sf.a.block(m_eq, n, m_ub, m_ub).setIdentity();
  sf.b.segment(m_eq, m_ub) = qp.ub_rhs;
  for (Eigen::Index k = 0; k < pins; ++k) sf.a(m_eq + m_ub + k, qp.pinned_zero[static_cast<std::size_t>(k)]) = 1.0;
  sf.g_hess = Eigen::MatrixXd::Zero(cols, cols);
  sf.g_hess.topLeftCorner(n, n) = -qp.hessian();
  sf.g_lin = Eigen::VectorXd::Zero(cols);
  sf.g_lin.head(n) = -qp.linear;
  return sf;
}

// Primal active-set method for min 1/2 z'Gz + g'z, Az = b, z >= 0 with G
// positive semidefinite. Steps are computed in the null space of the free
// columns; zero-curvature descent directions are followed to the boundary.
inline std::optional<Eigen::VectorXd> refine_active_set(const StandardForm& sf, Eigen::VectorXd z, int max_iter) {
  const Eigen::Index N = z.size();
  const Eigen::Index m = sf.a.rows();
  const double scale = std::max({1.0, z.lpNorm<Eigen::Infinity>(), sf.b.size() ? sf.b.lpNorm<Eigen::Infinity>() : 0.0});
  std::vector<char> fixed(static_cast<std::size_t>(N), 0);
  for (Eigen::Index i = 0; i < N; ++i) {
    if (z(i) <= 1e-9 * scale) {
      fixed[static_cast<std::size_t>(i)] = 1;
      z(i) = 0.0;
    }
  }

  auto free_set = [&] {
    std::vector<Eigen::Index> f;
    for (Eigen::Index i = 0; i < N; ++i)
      if (!fixed[static_cast<std::size_t>(i)]) f.push_back(i);
    return f;
  };
  auto columns = [&](const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(m, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = sf.a.col(idx[k]);
    return out;
  };
  auto restore = [&]() -> bool {
    const Eigen::VectorXd r = sf.b - sf.a * z;
    if (r.size() == 0 || r.lpNorm<Eigen::Infinity>() <= 1e-14 * scale) return true;
    const auto f = free_set();
    if (f.empty()) return r.lpNorm<Eigen::Infinity>() <= 1e-9 * scale;
    const Eigen::MatrixXd af = columns(f);
    const Eigen::VectorXd dz = af.completeOrthogonalDecomposition().solve(r);
    for (std::size_t k = 0; k < f.size(); ++k) {
      double& zi = z(f[k]);
      zi += dz(static_cast<Eigen::Index>(k));
      if (zi < -1e-9 * scale) return false;
      if (zi < 0.0) zi = 0.0;
    }
    return (sf.b - sf.a * z).lpNorm<Eigen::Infinity>() <= 1e-9 * scale;
  };
  if (!restore()) return std::nullopt;

  int stalled = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const bool bland = stalled > 2 * N;
    const auto f = free_set();
    const auto nf = static_cast<Eigen::Index>(f.size());
    const Eigen::VectorXd grad = sf.g_hess * z + sf.g_lin;
    const double tol_g = 1e-11 * std::max(1.0, grad.lpNorm<Eigen::Infinity>());

    Eigen::MatrixXd af = columns(f);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    Eigen::Index rank = 0;
    if (nf > 0 && m > 0) {
      qr.compute(af.transpose());
      qr.setThreshold(1e-10);
      rank = qr.rank();
    }

    bool stationary = true;
    if (nf - rank > 0) {
      Eigen::MatrixXd z_basis;
      if (m > 0) {
        const Eigen::MatrixXd q = qr.householderQ();
        z_basis = q.rightCols(nf - rank);
      } else {
        z_basis = Eigen::MatrixXd::Identity(nf, nf);
      }
      Eigen::VectorXd grad_f(nf);
      Eigen::MatrixXd g_ff(nf, nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        grad_f(a) = grad(f[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < nf; ++b) g_ff(a, b) = sf.g_hess(f[static_cast<std::size_t>(a)], f[static_cast<std::size_t>(b)]);
      }
      const Eigen::VectorXd zg = z_basis.transpose() * grad_f;
      if (zg.lpNorm<Eigen::Infinity>() > tol_g) {
        const Eigen::MatrixXd reduced = z_basis.transpose() * g_ff * z_basis;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
        const Eigen::VectorXd& lam = eig.eigenvalues();
        const Eigen::MatrixXd& vec = eig.eigenvectors();
        const double thresh = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());
        Eigen::VectorXd flat = Eigen::VectorXd::Zero(zg.size());
        Eigen::VectorXd newton = Eigen::VectorXd::Zero(zg.size());
        for (Eigen::Index k = 0; k < lam.size(); ++k) {
          const double c = vec.col(k).dot(zg);
          if (lam(k) <= thresh)
            flat += c * vec.col(k);
          else
            newton -= (c / lam(k)) * vec.col(k);
        }
        const bool zero_curvature = flat.lpNorm<Eigen::Infinity>() > tol_g;
        const Eigen::VectorXd u = zero_curvature ? Eigen::VectorXd(-flat) : newton;
        const Eigen::VectorXd d = z_basis * u;
        if (d.lpNorm<Eigen::Infinity>() > 1e-15 * scale) {
          stationary = false;
          double alpha_max = std::numeric_limits<double>::infinity();
          Eigen::Index block = -1;
          for (Eigen::Index a = 0; a < nf; ++a) {
            if (d(a) >= -1e-15 * scale) continue;
            const double ratio = z(f[static_cast<std::size_t>(a)]) / -d(a);
            if (ratio < alpha_max) {
              alpha_max = ratio;
              block = f[static_cast<std::size_t>(a)];
            }
          }
          double alpha = zero_curvature ? alpha_max : std::min(1.0, alpha_max);
          if (!std::isfinite(alpha)) return std::nullopt;  // unbounded ray
          for (Eigen::Index a = 0; a < nf; ++a) z(f[static_cast<std::size_t>(a)]) += alpha * d(a);
          if (block >= 0 && alpha >= alpha_max) {
            z(block) = 0.0;
            fixed[static_cast<std::size_t>(block)] = 1;
          }
          for (auto i : f)
            if (z(i) < 0.0) z(i) = 0.0;
          stalled = alpha <= 1e-14 ? stalled + 1 : 0;
          if (!restore()) return std::nullopt;
        }
      }
    }
    if (!stationary) continue;

    // Stationary on the current face: price the fixed bounds.
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
    if (nf > 0 && m > 0) {
      Eigen::VectorXd grad_f(nf);
      for (Eigen::Index a = 0; a < nf; ++a) grad_f(a) = grad(f[static_cast<std::size_t>(a)]);
      mu = qr.solve(grad_f);
    }
    const double tol_mult = 1e-9 * std::max(1.0, grad.lpNorm<Eigen::Infinity>());
    Eigen::Index release = -1;
    double most_negative = -tol_mult;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!fixed[static_cast<std::size_t>(i)]) continue;
      const double lambda = grad(i) - sf.a.col(i).dot(mu);
      if (lambda < most_negative) {
        release = i;
        if (bland) break;
        most_negative = lambda;
      }
    }
    if (release < 0) {
      if (!restore()) return std::nullopt;
      return z;
    }
    fixed[static_cast<std::size_t>(release)] = 0;
    ++stalled;
  }
  return std::nullopt;
}

struct Vertex {
  Eigen::VectorXd point;
  double weight;
};

}  // namespace detail

/// Maximizes a concave quadratic program. Frank-Wolfe with away steps and
/// exact line search produces a certified gap; an active-set polish then
/// moves to an exact KKT point when it can. Throws Infeasible when the
/// polytope is empty; an unmet tolerance is reported via `converged`.
inline QPSolution maximize_concave_qp(const QuadraticProgram& qp, const QPOptions& opts = {}) {
  if (!qp.is_concave()) throw Error(Errc::DimensionMismatch, "quadratic part is not concave");
  if (!(opts.tol > 0.0)) throw Error(Errc::DimensionMismatch, "tolerance must be positive");

  LinearProgram lp = qp.linearization(qp.linear);
  auto oracle = [&](const Eigen::VectorXd& g) {
    lp.objective = g;
    return solve_lp(lp).x;
  };
  auto rel = [](double q) { return std::max(1.0, std::abs(q)); };

  Eigen::VectorXd v = oracle(qp.linear);
  std::vector<detail::Vertex> active{{v, 1.0}};

  QPSolution sol;
  int it = 0;
  bool warm = true;
  double gap = std::numeric_limits<double>::infinity();

  auto try_polish = [&]() -> bool {
    const auto sf = detail::to_standard_form(qp);
    Eigen::VectorXd z(sf.a.cols());
    z.head(qp.num_variables()) = v;
    if (qp.ub_matrix.rows() > 0)
      z.tail(qp.ub_matrix.rows()) = (qp.ub_rhs - qp.ub_matrix * v).cwiseMax(0.0);
    const auto refined = detail::refine_active_set(sf, z, 50 * static_cast<int>(z.size()) + 200);
    if (!refined) return false;
    const Eigen::VectorXd cand = refined->head(qp.num_variables());
    const double scale = std::max(1.0, cand.lpNorm<Eigen::Infinity>());
    if (qp.feasibility_residual(cand) > 1e-9 * scale) return false;
    if (qp.objective(cand) < qp.objective(v) - 1e-9 * rel(qp.objective(v))) return false;
    v = cand;
    active.assign(1, {v, 1.0});
    return true;
  };

  while (true) {
    const Eigen::VectorXd g = qp.gradient(v);
    const Eigen::VectorXd s = oracle(g);
    gap = g.dot(s - v);
    const double q = qp.objective(v);
    if (opts.trace) *opts.trace << it << ' ' << q << ' ' << gap << '\n';
    if (gap <= opts.tol * rel(q)) {
      sol.converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;

    if (warm && opts.polish && (gap <= opts.warmup_tol * rel(q) || it >= opts.warmup_iterations)) {
      warm = false;
      if (try_polish()) {
        sol.polished = true;
        continue;  // re-evaluate the gap at the polished point
      }
    }

    std::size_t away = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double val = g.dot(active[k].point);
      if (val < worst) {
        worst = val;
        away = k;
      }
    }
    const double away_gap = g.dot(v) - worst;

    Eigen::VectorXd d;
    double gamma_max;
    const bool fw_step = gap >= away_gap || active.size() == 1;
    if (fw_step) {
      d = s - v;
      gamma_max = 1.0;
    } else {
      const double wa = active[away].weight;
      d = v - active[away].point;
      gamma_max = wa / (1.0 - wa);
    }
    const double slope = g.dot(d);
    const double curv = qp.curvature_along(d);
    double gamma = gamma_max;
    if (curv < 0.0) gamma = std::clamp(-slope / (2.0 * curv), 0.0, gamma_max);
    if (gamma <= 0.0) {
      ++it;
      if (!fw_step) continue;
      break;  // no ascent possible along the Frank-Wolfe direction
    }

    if (fw_step) {
      for (auto& a : active) a.weight *= (1.0 - gamma);
      auto same = [&](const detail::Vertex& a) {
        return (a.point - s).lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, s.lpNorm<Eigen::Infinity>());
      };
      auto hit = std::find_if(active.begin(), active.end(), same);
      if (gamma >= 1.0) {
        active.assign(1, {s, 1.0});
      } else if (hit != active.end()) {
        hit->weight += gamma;
      } else {
        active.push_back({s, gamma});
      }
    } else {
      for (auto& a : active) a.weight *= (1.0 + gamma);
      active[away].weight -= gamma;
      if (gamma >= gamma_max || active[away].weight <= 1e-15) active.erase(active.begin() + static_cast<std::ptrdiff_t>(away));
    }
    v += gamma * d;
    ++it;
  }

  sol.values = v;
  sol.objective = qp.objective(v);
  sol.gap = std::max(0.0, gap);
  sol.iterations = it;
  return sol;
}

}  // namespace parm
