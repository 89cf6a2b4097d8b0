#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "parm/concave_qp.hpp"
#include "parm/economy.hpp"
#include "parm/market_program.hpp"
#include "parm/penalties.hpp"
#include "parm/plan.hpp"

namespace parm {

struct SolveOptions {
  QPOptions qp;
  bool symmetrize = true;  // post-process optima on symmetric economies
};

/// Reads PARM_SOLVER_TOL (relative gap) when set to a positive number.
inline SolveOptions solve_options_from_env() {
  SolveOptions opts;
  if (const char* env = std::getenv("PARM_SOLVER_TOL")) {
    char* end = nullptr;
    const double tol = std::strtod(env, &end);
    if (end != env && tol > 0.0) opts.qp.tol = tol;
  }
  return opts;
}

/// Market-clearing prices for total served flow; cells without demand price at 1.
inline Eigen::MatrixXd prices_from_flows(const Economy& e, const Eigen::MatrixXd& total_flow) {
  const int n = e.size();
  if (total_flow.rows() != n || total_flow.cols() != n)
    throw Error(Errc::DimensionMismatch, "flow matrix must be n x n");
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double demand = e.potential_demand(i, j);
      const double flow = total_flow(i, j);
      if (flow < -1e-9 || flow > demand + 1e-9) {
        std::ostringstream os;
        os << "flow " << flow << " on (" << i << "," << j << ") outside [0, " << demand << "]";
        throw Error(Errc::FlowExceedsDemand, os.str());
      }
      if (demand > 0.0) p(i, j) = std::clamp(1.0 - flow / demand, 0.0, 1.0);
    }
  }
  return p;
}

/// Objective of the revenue program evaluated on a plan's own numbers.
inline double program_objective(const Economy& e, const MarketPlan& plan, bool preference_aware = true) {
  double q = 0.0;
  for (int i = 0; i < plan.n; ++i)
    for (int j = 0; j < plan.n; ++j) q += plan.served(i, j) * plan.p(i, j);
  q -= e.per_period_outside_option() * plan.total_mass();
  if (preference_aware)
    for (int t = 0; t < plan.n; ++t) q += e.idio() * plan.x(t, t);
  return q;
}

namespace detail {

inline MarketPlan extract_plan(const Economy& e, const MarketProgram& mp, const QPSolution& sol, Mode mode) {
  const int n = e.size();
  MarketPlan plan = MarketPlan::empty(n, mode);
  // Solver round-off: pinned cells are exactly zero and specks below 1e-12 of the plan scale vanish.
  Eigen::VectorXd v = sol.values;
  for (auto k : mp.qp.pinned_zero) v(k) = 0.0;
  const double speck = 1e-12 * std::max(1.0, v.lpNorm<Eigen::Infinity>());
  const auto clean = [speck](double a) { return a > speck ? a : 0.0; };
  const auto& vars = mp.vars;
  if (vars.types() == n) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int t = 0; t < n; ++t) {
          plan.f(i, j, t) = clean(v(vars.f(i, j, t)));
          plan.y(i, j, t) = clean(v(vars.y(i, j, t)));
        }
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < n; ++t) plan.x(i, t) = clean(v(vars.x(i, t)));
  } else {
    // Pooled program: split each pooled flow across types for reporting only.
    Eigen::VectorXd share = Eigen::VectorXd::Zero(n);
    if (e.has_unbounded_supply()) {
      int unbounded = 0;
      for (int t = 0; t < n; ++t) unbounded += e.supply(t).is_unbounded() ? 1 : 0;
      for (int t = 0; t < n; ++t) share(t) = e.supply(t).is_unbounded() ? 1.0 / unbounded : 0.0;
    } else {
      double total = 0.0;
      for (int t = 0; t < n; ++t) total += e.supply(t).mass();
      if (total > 0.0)
        for (int t = 0; t < n; ++t) share(t) = e.supply(t).mass() / total;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int t = 0; t < n; ++t) {
          plan.f(i, j, t) = share(t) * clean(v(vars.f(i, j, 0)));
          plan.y(i, j, t) = share(t) * clean(v(vars.y(i, j, 0)));
        }
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < n; ++t) plan.x(i, t) = share(t) * clean(v(vars.x(i, 0)));
  }
  Eigen::MatrixXd served = plan.served();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) served(i, j) = std::min(served(i, j), e.potential_demand(i, j));
  plan.p = prices_from_flows(e, served);
  plan.objective = sol.objective;
  plan.solver_gap = sol.gap;
  plan.solver_iterations = sol.iterations;
  for (std::size_t t = 0; t < mp.supply_caps.size(); ++t) {
    if (!mp.cap_from_unbounded[t]) continue;
    double used = 0.0;
    for (int i = 0; i < n; ++i) used += v(vars.x(i, static_cast<int>(t)));
    if (used >= mp.supply_caps[t] - 1e-6 * std::max(1.0, mp.supply_caps[t]))
      plan.notes.push_back("unbounded-supply cap binding for type " + std::to_string(t));
  }
  return plan;
}

inline QPSolution run(const MarketProgram& mp, const SolveOptions& opts) {
  QPSolution sol = maximize_concave_qp(mp.qp, opts.qp);
  if (!sol.converged) {
    std::ostringstream os;
    os << "solver stopped after " << sol.iterations << " iterations with gap " << sol.gap;
    throw Error(Errc::IterationLimit, os.str());
  }
  return sol;
}

}  // namespace detail

/// Largest violation of flow balance, relocation identity, supply, demand
/// capacity and nonnegativity (and the preferred-location plurality
/// constraint when `with_ic`).
inline double plan_feasibility_residual(const Economy& e, const MarketPlan& plan, bool with_ic) {
  const int n = plan.n;
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < n; ++t) {
      double in = 0.0, out = 0.0;
      for (int j = 0; j < n; ++j) {
        in += plan.dispatch(j, i, t);
        out += plan.dispatch(i, j, t);
        r = std::max({r, -plan.f(i, j, t), -plan.y(i, j, t)});
      }
      r = std::max({r, std::abs(plan.x(i, t) - in), std::abs(plan.x(i, t) - out), -plan.x(i, t)});
    }
  for (int t = 0; t < n; ++t) {
    if (!e.supply(t).is_unbounded()) r = std::max(r, plan.mass(t) - e.supply(t).mass());
    if (with_ic)
      for (int i = 0; i < n; ++i) r = std::max(r, plan.x(i, t) - plan.x(t, t));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r = std::max(r, plan.served(i, j) - e.potential_demand(i, j));
  return r;
}

/// Pairs opposite flows on symmetric demand: f_ij <- (f_ij + f_ji)/2 per type,
/// cross-location relocations dropped, masses recomputed from inflow.
inline MarketPlan symmetrized(const Economy& e, const MarketPlan& plan) {
  const int n = plan.n;
  MarketPlan out = plan;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 0; t < n; ++t) {
        out.f(i, j, t) = 0.5 * (plan.f(i, j, t) + plan.f(j, i, t));
        out.y(i, j, t) = i == j ? plan.y(i, i, t) : 0.0;
      }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < n; ++t) {
      double in = 0.0;
      for (int j = 0; j < n; ++j) in += out.dispatch(j, i, t);
      out.x(i, t) = in;
    }
  out.p = prices_from_flows(e, out.served());
  out.objective = program_objective(e, out);
  return out;
}

namespace detail {

inline void maybe_symmetrize(const Economy& e, MarketPlan& plan, bool with_ic, const SolveOptions& opts) {
  if (!opts.symmetrize || !is_symmetric(e)) return;
  MarketPlan sym = symmetrized(e, plan);
  const double scale = std::max(1.0, std::abs(plan.objective));
  const double drift = sym.objective - plan.objective;
  if (plan_feasibility_residual(e, sym, with_ic) <= 1e-8 && drift >= -1e-8 * scale) {
    sym.notes.push_back("symmetrized");
    plan = std::move(sym);
  } else {
    plan.notes.push_back("symmetrization rejected");
  }
}

}  // namespace detail

/// Full-information optimum: the revenue program without the plurality constraint.
inline MarketPlan solve_first_best(const Economy& e, const SolveOptions& opts = {}) {
  const auto mp = build_market_program(e, {.ic_constraint = false, .preference_aware = true});
  auto plan = detail::extract_plan(e, mp, detail::run(mp, opts), Mode::FirstBest);
  detail::maybe_symmetrize(e, plan, false, opts);
  return plan;
}

/// PARM: revenue program with the plurality constraint, preference-aware pay, and penalties.
inline ParmOutcome solve_parm(const Economy& e, const SolveOptions& opts = {}) {
  const auto mp = build_market_program(e, {.ic_constraint = true, .preference_aware = true});
  auto plan = detail::extract_plan(e, mp, detail::run(mp, opts), Mode::PARM);
  detail::maybe_symmetrize(e, plan, true, opts);
  auto penalties = compute_penalties(e, plan);
  return {std::move(plan), preference_compensation(e), std::move(penalties)};
}

/// PORM: type-blind pricing on pooled supply with I ignored and flat pay.
inline PormOutcome solve_porm(const Economy& e, const SolveOptions& opts = {}) {
  const auto mp = build_market_program(e, {.ic_constraint = false, .preference_aware = false});
  auto plan = detail::extract_plan(e, mp, detail::run(mp, opts), Mode::PORM);
  return {std::move(plan), flat_compensation(e)};
}

}  // namespace parm
