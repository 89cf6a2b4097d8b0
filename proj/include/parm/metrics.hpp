#pragma once

#include "parm/economy.hpp"
#include "parm/plan.hpp"
#include "parm/porm_equilibrium.hpp"

namespace parm {

/// Per-period platform revenue: fares collected minus driver pay on every dispatch.
inline double revenue(const MarketPlan& plan, const CompensationSchedule& comp) {
  double q = 0.0;
  for (int i = 0; i < plan.n; ++i)
    for (int j = 0; j < plan.n; ++j)
      for (int t = 0; t < plan.n; ++t) q += plan.p(i, j) * plan.f(i, j, t) - comp.c(i, t) * plan.dispatch(i, j, t);
  return q;
}

inline double revenue(const ParmOutcome& o) { return revenue(o.plan, o.compensation); }
inline double revenue(const PormOutcome& o) { return revenue(o.plan, o.compensation); }
inline double revenue(const EquilibriumOutcome& eq) { return eq.revenue; }

/// Rider value of served trips, plus drivers' preferred-location utility,
/// minus the outside option of every employed driver.
inline double welfare(const Economy& e, const MarketPlan& plan) {
  double q = 0.0;
  for (int i = 0; i < plan.n; ++i)
    for (int j = 0; j < plan.n; ++j) q += plan.served(i, j) * (1.0 + plan.p(i, j)) / 2.0;
  for (int t = 0; t < plan.n; ++t) q += e.idio() * plan.x(t, t);
  return q - e.per_period_outside_option() * plan.total_mass();
}

inline double welfare(const Economy&, const EquilibriumOutcome& eq) { return eq.welfare; }

}  // namespace parm
