#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "parm/economy.hpp"
#include "parm/errors.hpp"
#include "parm/plan.hpp"

namespace parm {

/// Where strategic drivers settle when PORM prices are held fixed.
struct EquilibriumOutcome {
  std::array<double, 2> x{};       // drivers per location
  std::array<double, 2> served{};  // rides fulfilled
  std::array<double, 2> idle{};
  std::array<double, 2> prices{};
  double total_mass = 0.0;
  double revenue = 0.0;
  double welfare = 0.0;
  bool corner = false;  // every driver at the preferred location
  bool entry_binding = false;
  Location preferred = 1;
  std::vector<std::string> notes;
};

enum class EquilibriumMethod { ClosedForm, Bisection };

namespace detail {

struct EquilibriumClass {
  Location preferred;
  double supply;   // available drivers of the single type
  double rides[2]; // rides PORM plans at each location
  double prices[2];
};

inline EquilibriumClass equilibrium_class(const Economy& e, const MarketPlan& porm) {
  check_dimensions(e, porm);
  if (e.size() != 2) throw Error(Errc::UnsupportedClass, "equilibrium needs exactly two locations");
  const auto& a = e.alpha();
  if (std::abs(a(0, 0) - 1.0) > 1e-12 || std::abs(a(1, 1) - 1.0) > 1e-12)
    throw Error(Errc::UnsupportedClass, "equilibrium needs trips that stay within their location");
  int active = -1;
  for (int t = 0; t < 2; ++t) {
    const auto& s = e.supply(t);
    if (s.is_unbounded() || s.mass() > 0.0) {
      if (active >= 0) throw Error(Errc::UnsupportedClass, "equilibrium needs a single driver type");
      active = t;
    }
  }
  if (active < 0) throw Error(Errc::UnsupportedClass, "no driver type has positive supply");
  EquilibriumClass c{};
  c.preferred = active;
  c.supply = e.effective_supply(active);
  for (int i = 0; i < 2; ++i) {
    c.rides[i] = porm.served(i, i);
    c.prices[i] = porm.p(i, i);
  }
  return c;
}

}  // namespace detail

/// Per-period utility at the preferred location minus that at the other one,
/// with `x_pref` of `total` drivers at the preferred location.
inline double utility_gap(double big_w, double idio, double rides_pref, double rides_other, double x_pref,
                          double total) {
  const auto rate = [](double rides, double mass) { return mass > 0.0 ? std::min(1.0, rides / mass) : 1.0; };
  return big_w * rate(rides_pref, x_pref) + idio - big_w * rate(rides_other, total - x_pref);
}

/// Strategic-driver outcome under PORM prices on two locations with
/// within-location trips and one driver type.
///
/// Drivers enter while they earn at least W and spread so that the
/// preferred location, where they also collect I, pays the same as the other.
/// Idle drivers are not paid; revenue is sum_i (p_i - W) served_i.
inline EquilibriumOutcome porm_equilibrium(const Economy& e, const MarketPlan& porm,
                                           EquilibriumMethod method = EquilibriumMethod::ClosedForm) {
  const auto c = detail::equilibrium_class(e, porm);
  const int r = c.preferred;
  const int o = 1 - r;
  const double big_w = e.per_period_outside_option();
  const double idio = e.idio();
  const double pref_at_par = big_w * c.rides[r] / (big_w - idio);  // preferred-location mass earning exactly W

  EquilibriumOutcome out;
  out.preferred = r;
  const double entry_cap = c.rides[o] + pref_at_par;
  out.total_mass = std::min(c.supply, entry_cap);
  out.entry_binding = entry_cap < c.supply;
  const double m = out.total_mass;

  double x_pref = 0.0;
  if (method == EquilibriumMethod::ClosedForm) {
    x_pref = std::min(pref_at_par, m);
  } else {
    const auto gap = [&](double xr) { return utility_gap(big_w, idio, c.rides[r], c.rides[o], xr, m); };
    double lo = std::min(c.rides[r], m);
    double hi = m;
    if (gap(hi) >= -1e-12 * big_w) {
      x_pref = hi;
    } else {
      while (hi - lo > 1e-10 * std::max(1.0, m)) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) >= 0.0 ? lo : hi) = mid;
      }
      x_pref = 0.5 * (lo + hi);
    }
  }
  out.corner = x_pref >= m - 1e-12 * std::max(1.0, m);
  if (out.corner) x_pref = m;

  out.x[r] = x_pref;
  out.x[o] = m - x_pref;
  double value = 0.0;
  for (int i = 0; i < 2; ++i) {
    out.prices[i] = c.prices[i];
    out.served[i] = std::min(out.x[i], c.rides[i]);
    out.idle[i] = out.x[i] - out.served[i];
    out.revenue += (out.prices[i] - big_w) * out.served[i];
    value += out.served[i] * (1.0 + out.prices[i]) / 2.0;
  }
  out.welfare = value + idio * out.x[r] - big_w * m;
  if (out.entry_binding) out.notes.push_back("entry margin binds: drivers earn exactly the outside option");
  if (out.corner) out.notes.push_back("corner: all drivers at the preferred location");
  return out;
}

}  // namespace parm
