#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "parm/mechanisms.hpp"
#include "parm/metrics.hpp"
#include "parm/porm_equilibrium.hpp"

using namespace parm;
using namespace parm::testing;

namespace {

Economy local_trips_with_idio(double i_frac, double s1 = 200) {
  return validate_economy(make_spec(vec2(1000, 1000), rows2(1, 0, 0, 1), caps(0, s1), 40, 0.99, i_frac));
}

void expect_invariants(const Economy& e, const MarketPlan& porm, const EquilibriumOutcome& eq) {
  const double big_w = e.per_period_outside_option();
  EXPECT_NEAR(eq.x[0] + eq.x[1], eq.total_mass, 1e-8);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(eq.served[i], std::min(eq.x[i], porm.served(i, i)), 1e-9);
    EXPECT_NEAR(eq.idle[i], eq.x[i] - eq.served[i], 1e-9);
    EXPECT_EQ(eq.prices[i], porm.p(i, i));
  }
  const int r = eq.preferred, o = 1 - r;
  const double pref = big_w * eq.served[r] / eq.x[r] + e.idio();
  const double other = eq.x[o] > 0 ? big_w * std::min(1.0, eq.served[o] / eq.x[o]) : big_w;
  if (eq.corner) EXPECT_GE(pref, other - 1e-8);
  else EXPECT_NEAR(pref, other, 1e-8);
  EXPECT_LE(eq.revenue, revenue(porm, flat_compensation(e)) + 1e-8);
}

}  // namespace

TEST(PormEquilibrium, LocalTripsOneType) {
  const auto e = local_trips_one_type();
  const auto porm = solve_porm(e);
  const auto eq = porm_equilibrium(e, porm.plan);
  EXPECT_NEAR(eq.x[0], 75.0, 0.5);
  EXPECT_NEAR(eq.x[1], 125.0, 0.5);
  EXPECT_NEAR(eq.served[1], 100.0, 0.5);
  EXPECT_NEAR(eq.idle[1], 25.0, 0.5);
  EXPECT_NEAR(eq.idle[0], 0.0, 1e-9);
  EXPECT_FALSE(eq.corner);
  expect_invariants(e, porm.plan, eq);
  const double big_w = e.per_period_outside_option();
  EXPECT_NEAR(eq.revenue, (porm.plan.p(0, 0) - big_w) * (100.0 + 75.0), 1e-6);
}

TEST(PormEquilibrium, LocalTripsSmallPreferred) {
  const auto e = local_trips_small_preferred();
  const auto porm = solve_porm(e);
  const auto eq = porm_equilibrium(e, porm.plan);
  EXPECT_NEAR(eq.x[0], 177.3, 0.5);
  EXPECT_NEAR(eq.x[1], 22.7, 0.5);
  EXPECT_NEAR(eq.served[1], 18.2, 0.5);
  EXPECT_NEAR(eq.idle[1], 4.5, 0.5);
  expect_invariants(e, porm.plan, eq);
}

TEST(PormEquilibrium, NoPreferenceNoDrift) {
  const auto e = local_trips_with_idio(0.0);
  const auto porm = solve_porm(e);
  const auto eq = porm_equilibrium(e, porm.plan);
  EXPECT_NEAR(eq.x[0], porm.plan.x.row(0).sum(), 1e-8);
  EXPECT_NEAR(eq.x[1], porm.plan.x.row(1).sum(), 1e-8);
  EXPECT_NEAR(eq.idle[0] + eq.idle[1], 0.0, 1e-9);
  EXPECT_NEAR(eq.revenue, revenue(porm), 1e-8);
}

TEST(PormEquilibrium, BisectionAgreesWithClosedForm) {
  for (double frac : {0.0, 0.1, 0.2, 0.35, 0.5, 0.7, 0.95}) {
    for (double s1 : {50.0, 200.0, 600.0}) {
      const auto e = local_trips_with_idio(frac, s1);
      const auto porm = solve_porm(e).plan;
      const auto a = porm_equilibrium(e, porm, EquilibriumMethod::ClosedForm);
      const auto b = porm_equilibrium(e, porm, EquilibriumMethod::Bisection);
      EXPECT_NEAR(a.x[1], b.x[1], 1e-7) << frac << " " << s1;
      EXPECT_EQ(a.corner, b.corner) << frac << " " << s1 << " " << a.x[1] << " " << b.x[1] << " " << a.total_mass;
      expect_invariants(e, porm, a);
      expect_invariants(e, porm, b);
    }
  }
}

TEST(PormEquilibrium, UtilityGapIsMonotone) {
  const double big_w = 0.4, idio = 0.08;
  double prev = std::numeric_limits<double>::infinity();
  for (double x = 100; x <= 200; x += 0.5) {
    const double g = utility_gap(big_w, idio, 100, 100, x, 200);
    EXPECT_LE(g, prev + 1e-15);
    prev = g;
  }
}

TEST(PormEquilibrium, CornerFromHalfOfW) {
  for (double frac : {0.5, 0.6, 0.8, 0.99}) {
    const auto e = local_trips_with_idio(frac);
    const auto eq = porm_equilibrium(e, solve_porm(e).plan);
    EXPECT_TRUE(eq.corner) << frac;
    EXPECT_NEAR(eq.x[1], eq.total_mass, 1e-9);
  }
  const auto e = local_trips_with_idio(0.45);
  EXPECT_FALSE(porm_equilibrium(e, solve_porm(e).plan).corner);
}

TEST(PormEquilibrium, EntryMarginWithAmpleSupply) {
  const auto e = local_trips_with_idio(0.2, 1000);
  const auto porm = solve_porm(e);
  const auto eq = porm_equilibrium(e, porm.plan);
  EXPECT_TRUE(eq.entry_binding);
  EXPECT_NEAR(eq.idle[0], 0.0, 1e-9);
  EXPECT_NEAR(eq.revenue, revenue(porm), 1e-8);
  EXPECT_LT(eq.welfare, welfare(e, porm.plan));
}

TEST(PormEquilibrium, RejectsOtherClasses) {
  const auto code = [](const Economy& e) {
    try {
      porm_equilibrium(e, solve_porm(e).plan);
    } catch (const Error& err) {
      return err.code();
    }
    return Errc::ConfigError;
  };
  EXPECT_EQ(code(unbalanced_small_origin()), Errc::UnsupportedClass);
  EXPECT_EQ(code(disconnected_chains()), Errc::UnsupportedClass);
  const auto three = validate_economy(make_spec(Eigen::Vector3d(1, 1, 1), Eigen::Matrix3d::Identity(),
                                                {SupplyCap::of(0), SupplyCap::of(0), SupplyCap::of(1)}, 40, 0.99, 0.2));
  EXPECT_EQ(code(three), Errc::UnsupportedClass);
}

TEST(Welfare, Accounting) {
  const auto e = local_trips_one_type();
  EXPECT_EQ(welfare(e, MarketPlan::empty(2, Mode::PARM)), 0.0);
  EXPECT_EQ(revenue(MarketPlan::empty(2, Mode::PARM), preference_compensation(e)), 0.0);
  auto plan = MarketPlan::empty(2, Mode::PARM);
  plan.f(0, 0, 0) = 40.0;
  plan.p(0, 0) = 0.5;
  EXPECT_DOUBLE_EQ(welfare(e, plan), 0.75 * 40.0);
}

TEST(Welfare, PluralityBeatsStrategicPooling) {
  const auto e = local_trips_one_type();
  const auto parm = solve_parm(e);
  const auto eq = porm_equilibrium(e, solve_porm(e).plan);
  EXPECT_GT(welfare(e, parm.plan), welfare(e, eq));
}
