#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "parm/economy.hpp"
#include "parm/linalg.hpp"
#include "parm/plan.hpp"

namespace parm {

namespace detail {

/// Linear system for drivers of every true type k that report `reported` and
/// follow the misreport strategy: accept dispatches away from the reported
/// location, relocate (paying P^k once) on reaching it. Unknowns are the
/// values pi_i^k (index k*n + i) and the break-even penalties P^k (n*n + k).
/// Unoccupied locations are treated like the reported location.
struct PenaltySystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

inline PenaltySystem penalty_system(const Economy& e, const DispatchChain& ch) {
  const int n = e.size();
  const int tau = ch.type;
  const int m = n * n + n;
  PenaltySystem s{Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m)};
  const double w = e.outside_option();
  const double delta = e.discount();
  const double big_w = e.per_period_outside_option();
  const double idio = e.idio();
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const int row = k * n + i;
      s.a(row, row) = 1.0;
      const double bonus = i == k ? idio : 0.0;
      if (i == tau || !ch.on_support[static_cast<std::size_t>(i)]) {
        s.a(row, n * n + k) = 1.0;
        s.b(row) = delta * w + bonus;
      } else {
        for (int j = 0; j < n; ++j) s.a(row, k * n + j) -= delta * ch.transition(i, j);
        s.b(row) = big_w + bonus;
      }
    }
    const int row = n * n + k;
    for (int i = 0; i < n; ++i) s.a(row, k * n + i) = ch.occupancy(i);
    s.b(row) = w;
  }
  return s;
}

}  // namespace detail

/// Break-even misreport penalties. For each reported type t the penalty is the
/// largest P^{k->t} over true types k, floored at zero; a type with no drivers
/// gets P = 0 and is flagged undefined.
inline PenaltySchedule compute_penalties(const Economy& e, const MarketPlan& plan) {
  check_dimensions(e, plan);
  const int n = e.size();
  auto out = PenaltySchedule::zero(n);
  const double tol = support_threshold(plan);
  for (int t = 0; t < n; ++t) {
    const auto ch = dispatch_chain(plan, t);
    if (ch.mass <= tol) {
      out.undefined[static_cast<std::size_t>(t)] = true;
      out.notes.push_back("type " + std::to_string(t) + " has no drivers; penalty undefined, set to 0");
      continue;
    }
    const auto sys = detail::penalty_system(e, ch);
    const auto sol = solve_dense(sys.a, sys.b, "penalty system for type " + std::to_string(t));
    out.condition[static_cast<std::size_t>(t)] = sol.rcond;
    if (sol.ill_conditioned()) {
      std::ostringstream os;
      os << "penalty system for type " << t << " ill-conditioned (rcond " << sol.rcond << ")";
      out.notes.push_back(os.str());
    }
    double best = 0.0;
    for (int k = 0; k < n; ++k) {
      out.p_raw(k, t) = sol.x(n * n + k);
      for (int i = 0; i < n; ++i) out.deviation_value(k, t, i) = sol.x(k * n + i);
      best = std::max(best, out.p_raw(k, t));
    }
    out.penalty(t) = best;
  }
  return out;
}

/// Largest residual of the penalty systems at the schedule's own values.
inline double penalty_system_residual(const Economy& e, const MarketPlan& plan, const PenaltySchedule& s) {
  const int n = e.size();
  double r = 0.0;
  for (int t = 0; t < n; ++t) {
    if (s.undefined[static_cast<std::size_t>(t)]) continue;
    const auto sys = detail::penalty_system(e, dispatch_chain(plan, t));
    Eigen::VectorXd z(n * n + n);
    for (int k = 0; k < n; ++k) {
      z(n * n + k) = s.p_raw(k, t);
      for (int i = 0; i < n; ++i) z(k * n + i) = s.deviation_value(k, t, i);
    }
    r = std::max(r, (sys.a * z - sys.b).lpNorm<Eigen::Infinity>());
  }
  return r;
}

}  // namespace parm
