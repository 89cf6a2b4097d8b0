#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parm/economy.hpp"
#include "parm/errors.hpp"
#include "parm/linalg.hpp"
#include "parm/plan.hpp"

namespace parm {

inline constexpr double kAuditTolerance = 1e-8;

struct AuditReport {
  double c1 = 0.0;  // service is a best response
  double c2 = 0.0;  // flow balance
  double c3 = 0.0;  // market clearing
  double c4 = 0.0;  // drivers earn exactly the outside option
  double c5 = 0.0;  // feasibility
  Eigen::MatrixXd pi;  // pi(i, t)
  Eigen::VectorXd stationary_residuals;
  bool pass = false;
  std::vector<std::string> notes;

  double worst() const { return std::max({c1, c2, c3, c4, c5, stationary_residuals.size() ? stationary_residuals.maxCoeff() : 0.0}); }
};

/// Lifetime utilities of truthful type-t drivers who always serve:
/// pi = r + delta T pi with r_i = c(i, t) + I 1{i = t}.
inline Eigen::VectorXd service_values(const Economy& e, const DispatchChain& ch, const CompensationSchedule& comp) {
  const int n = e.size();
  const int t = ch.type;
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r(i) = comp.c(i, t) + (i == t ? e.idio() : 0.0);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - e.discount() * ch.transition;
  return solve_dense(a, r, "service value system for type " + std::to_string(t)).x;
}

/// ||mu T - mu||_inf for the occupancy distribution mu of one type.
inline double stationary_check(const MarketPlan& plan, DriverType t) {
  const auto ch = dispatch_chain(plan, t);
  if (ch.mass <= support_threshold(plan))
    throw Error(Errc::EmptyType, "type " + std::to_string(t) + " has no drivers");
  const Eigen::RowVectorXd mu = ch.occupancy.transpose();
  return (mu * ch.transition - mu).lpNorm<Eigen::Infinity>();
}

inline AuditReport verify_steady_state(const Economy& e, const MarketPlan& plan, const CompensationSchedule& comp) {
  check_dimensions(e, plan);
  const int n = e.size();
  if (comp.c.rows() != n || comp.c.cols() != n)
    throw Error(Errc::DimensionMismatch, "compensation dimensions do not match the economy");
  AuditReport rep;
  rep.pi = Eigen::MatrixXd::Zero(n, n);
  rep.stationary_residuals = Eigen::VectorXd::Zero(n);
  const double tol = support_threshold(plan);
  const double w = e.outside_option();

  for (int t = 0; t < n; ++t) {
    const auto ch = dispatch_chain(plan, t);
    rep.pi.col(t) = service_values(e, ch, comp);
    if (ch.mass <= tol) {
      rep.notes.push_back("type " + std::to_string(t) + " has no drivers");
      continue;
    }
    rep.stationary_residuals(t) = stationary_check(plan, t);
    for (int i = 0; i < n; ++i) {
      if (!ch.on_support[static_cast<std::size_t>(i)]) continue;
      const double stay = i == t ? e.idio() : 0.0;
      for (int k = 0; k < n; ++k)
        rep.c1 = std::max(rep.c1, stay + e.discount() * rep.pi(k, t) - rep.pi(i, t));
      rep.c4 = std::max(rep.c4, std::abs(rep.pi(i, t) - w));
    }
  }

  for (int i = 0; i < n; ++i)
    for (int t = 0; t < n; ++t) {
      double in = 0.0, out = 0.0;
      for (int j = 0; j < n; ++j) {
        in += plan.dispatch(j, i, t);
        out += plan.dispatch(i, j, t);
        rep.c5 = std::max({rep.c5, -plan.f(i, j, t), -plan.y(i, j, t)});
      }
      rep.c2 = std::max({rep.c2, std::abs(plan.x(i, t) - in), std::abs(plan.x(i, t) - out)});
      rep.c5 = std::max(rep.c5, -plan.x(i, t));
    }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double demand = e.potential_demand(i, j);
      const double p = plan.p(i, j);
      const double price_range = std::max({0.0, -p, p - 1.0});
      const double cleared = demand > 0.0 ? std::abs(plan.served(i, j) - demand * (1.0 - p)) : plan.served(i, j);
      rep.c3 = std::max({rep.c3, price_range, cleared});
    }

  for (int t = 0; t < n; ++t)
    if (!e.supply(t).is_unbounded()) rep.c5 = std::max(rep.c5, plan.mass(t) - e.supply(t).mass());

  rep.pass = rep.worst() <= kAuditTolerance;
  return rep;
}

/// Driver action in the deviation MDP.
struct DriverAction {
  enum class Kind { Serve, RelocateTo } kind = Kind::Serve;
  Location target = 0;

  bool operator==(const DriverAction&) const = default;
  std::string str() const { return kind == Kind::Serve ? "Serve" : "RelocateTo(" + std::to_string(target) + ")"; }
};

/// Optimal value of a single infinitesimal type-k driver who reported b,
/// with the plan's masses and chains held fixed.
struct DeviationValue {
  DriverType true_type = 0;
  DriverType reported_type = 0;
  int n = 0;
  Eigen::VectorXd values;  // by state (location, believed type, penalty paid)
  std::vector<DriverAction> best_action;
  double expected_value = 0.0;
  double bellman_residual = 0.0;
  int policy_iterations = 0;
  long value_iterations = 0;
  std::vector<std::string> notes;

  static int state(int n, Location i, DriverType t, bool paid) { return ((paid ? 1 : 0) * n + t) * n + i; }
  double value(Location i, DriverType t, bool paid) const { return values(state(n, i, t, paid)); }
  const DriverAction& action(Location i, DriverType t, bool paid) const {
    return best_action[static_cast<std::size_t>(state(n, i, t, paid))];
  }
};

namespace detail {

struct DeviationMdp {
  int n = 0;
  int states = 0;
  double delta = 0.0;
  std::vector<DispatchChain> chains;
  Eigen::MatrixXd pay;        // c(i, t)
  Eigen::VectorXd penalty;    // P[t]
  double idio = 0.0;
  DriverType k = 0;

  DeviationMdp(const Economy& e, const MarketPlan& plan, const CompensationSchedule& comp,
               const Eigen::VectorXd& penalties, DriverType true_type)
      : n(e.size()), states(2 * e.size() * e.size()), delta(e.discount()), pay(comp.c), penalty(penalties),
        idio(e.idio()), k(true_type) {
    for (int t = 0; t < n; ++t) chains.push_back(dispatch_chain(plan, t));
  }

  struct Decoded {
    Location i;
    DriverType t;
    bool paid;
  };
  Decoded decode(int s) const { return {s % n, (s / n) % n, s >= n * n}; }

  std::vector<DriverAction> actions() const {
    std::vector<DriverAction> out{{DriverAction::Kind::Serve, 0}};
    for (int j = 0; j < n; ++j) out.push_back({DriverAction::Kind::RelocateTo, j});
    return out;
  }

  double reward(int s, const DriverAction& a) const {
    const auto [i, t, paid] = decode(s);
    const double stay = i == k ? idio : 0.0;
    if (a.kind == DriverAction::Kind::Serve) return pay(i, t) + stay;
    return stay - ((a.target != t && !paid) ? penalty(t) : 0.0);
  }

  template <class F>
  void for_each_next(int s, const DriverAction& a, F&& fn) const {
    const auto [i, t, paid] = decode(s);
    if (a.kind == DriverAction::Kind::Serve) {
      for (int j = 0; j < n; ++j) {
        const double prob = chains[static_cast<std::size_t>(t)].transition(i, j);
        if (prob != 0.0) fn(DeviationValue::state(n, j, t, paid), prob);
      }
      return;
    }
    const int j = a.target;
    const bool moves_type = j != t;
    fn(DeviationValue::state(n, j, moves_type ? j : t, paid || moves_type), 1.0);
  }

  double q(int s, const DriverAction& a, const Eigen::VectorXd& v) const {
    double cont = 0.0;
    for_each_next(s, a, [&](int next, double prob) { cont += prob * v(next); });
    return reward(s, a) + delta * cont;
  }

  Eigen::VectorXd evaluate(const std::vector<DriverAction>& policy) const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(states, states);
    Eigen::VectorXd r(states);
    for (int s = 0; s < states; ++s) {
      const auto& act = policy[static_cast<std::size_t>(s)];
      r(s) = reward(s, act);
      for_each_next(s, act, [&](int next, double prob) { a(s, next) -= delta * prob; });
    }
    return solve_dense(a, r, "policy evaluation").x;
  }
};

}  // namespace detail

/// Best response of a type-k driver who reported b, under an explicit penalty vector.
///
/// Policy iteration finds the optimal stationary policy; value iteration from
/// that point then confirms the Bellman fixed point to (1 - delta) 1e-9.
inline DeviationValue driver_best_response(const Economy& e, const MarketPlan& plan,
                                           const CompensationSchedule& comp, const Eigen::VectorXd& penalties,
                                           DriverType k, DriverType b) {
  check_dimensions(e, plan);
  const int n = e.size();
  if (k < 0 || k >= n || b < 0 || b >= n || penalties.size() != n)
    throw Error(Errc::DimensionMismatch, "type index or penalty vector out of range");
  DeviationValue out;
  out.true_type = k;
  out.reported_type = b;
  out.n = n;
  const auto reported = dispatch_chain(plan, b);
  if (reported.mass <= support_threshold(plan)) {
    out.expected_value = e.outside_option();
    out.notes.push_back(std::string(to_string(Errc::NoDispatchPlan)) + ": type " + std::to_string(b) +
                        " has no drivers; outside option assumed");
    return out;
  }

  const detail::DeviationMdp mdp(e, plan, comp, penalties, k);
  const auto actions = mdp.actions();
  std::vector<DriverAction> policy(static_cast<std::size_t>(mdp.states), actions.front());
  Eigen::VectorXd v;
  for (;;) {
    v = mdp.evaluate(policy);
    ++out.policy_iterations;
    bool changed = false;
    for (int s = 0; s < mdp.states; ++s) {
      auto& current = policy[static_cast<std::size_t>(s)];
      double best = mdp.q(s, current, v);
      const double margin = 1e-12 * std::max(1.0, std::abs(best));
      for (const auto& a : actions) {
        const double qa = mdp.q(s, a, v);
        if (qa > best + margin) {
          best = qa;
          current = a;
          changed = true;
        }
      }
    }
    if (!changed) break;
    if (out.policy_iterations > 10000) throw Error(Errc::NonConvergence, "policy iteration did not settle");
  }

  const double stop = (1.0 - e.discount()) * 1e-9;
  constexpr long kMaxSweeps = 10'000'000;
  Eigen::VectorXd next(mdp.states);
  for (;;) {
    for (int s = 0; s < mdp.states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& a : actions) best = std::max(best, mdp.q(s, a, v));
      next(s) = best;
    }
    ++out.value_iterations;
    const double change = (next - v).lpNorm<Eigen::Infinity>();
    v.swap(next);
    if (change <= stop) {
      out.bellman_residual = change;
      break;
    }
    if (out.value_iterations >= kMaxSweeps)
      throw Error(Errc::NonConvergence, "value iteration hit the sweep cap");
  }

  out.values = v;
  out.best_action.resize(static_cast<std::size_t>(mdp.states));
  for (int s = 0; s < mdp.states; ++s) {
    DriverAction best_a = policy[static_cast<std::size_t>(s)];
    double best = mdp.q(s, best_a, v);
    for (const auto& a : actions) {
      const double qa = mdp.q(s, a, v);
      if (qa > best + 1e-12 * std::max(1.0, std::abs(best))) {
        best = qa;
        best_a = a;
      }
    }
    out.best_action[static_cast<std::size_t>(s)] = best_a;
  }
  for (int i = 0; i < n; ++i) out.expected_value += reported.occupancy(i) * out.value(i, b, false);
  return out;
}

inline DeviationValue driver_best_response(const Economy& e, const ParmOutcome& parm, DriverType k, DriverType b) {
  return driver_best_response(e, parm.plan, parm.compensation, parm.penalties.penalty, k, b);
}

/// Value of the fixed misreport strategy: serve everywhere except the reported
/// location b, where the driver pays `penalty` once and moves on to earn w.
inline double misreport_relocate_value(const Economy& e, const MarketPlan& plan, double penalty, DriverType k,
                                     DriverType b) {
  check_dimensions(e, plan);
  const int n = e.size();
  const auto ch = dispatch_chain(plan, b);
  if (ch.mass <= support_threshold(plan))
    throw Error(Errc::PenaltyUndefined, "type " + std::to_string(b) + " has no drivers");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) {
    const double bonus = i == k ? e.idio() : 0.0;
    if (i == b || !ch.on_support[static_cast<std::size_t>(i)]) {
      r(i) = e.discount() * e.outside_option() - penalty + bonus;
    } else {
      a.row(i) -= e.discount() * ch.transition.row(i);
      r(i) = e.per_period_outside_option() + bonus;
    }
  }
  const auto pi = solve_dense(a, r, "misreport strategy system").x;
  return ch.occupancy.dot(pi);
}

inline double misreport_relocate_value(const Economy& e, const ParmOutcome& parm, DriverType k, DriverType b) {
  return misreport_relocate_value(e, parm.plan, parm.penalties.penalty(b), k, b);
}

}  // namespace parm
