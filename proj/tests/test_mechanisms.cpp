#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "parm/mechanisms.hpp"
#include "parm/metrics.hpp"

using namespace parm;
using namespace parm::testing;

TEST(Prices, ClearingCondition) {
  const auto e = validate_economy(make_spec(vec2(1000, 1000), rows2(0.75, 0.25, 0.25, 0.75), caps(1, 1), 40, 0.99, 0));
  Eigen::MatrixXd flow(2, 2);
  flow << 0, 125, 250, 750;
  const auto p = prices_from_flows(e, flow);
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(p(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(p(1, 1), 0.0);
  flow(0, 1) = 251;
  try {
    prices_from_flows(e, flow);
    FAIL() << "expected FlowExceedsDemand";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::FlowExceedsDemand);
  }
}

TEST(Prices, ZeroDemandCellPricesAtOne) {
  const auto e = local_trips_one_type();
  const auto p = prices_from_flows(e, Eigen::MatrixXd::Zero(2, 2));
  EXPECT_DOUBLE_EQ(p(0, 1), 1.0);
}

TEST(FirstBest, UnbalancedSmallOrigin) {
  const auto plan = solve_first_best(unbalanced_small_origin());
  EXPECT_NEAR(plan.f(0, 1, 0), 15.7, 0.1);
  EXPECT_NEAR(plan.f(1, 0, 0), 15.7, 0.1);
  EXPECT_NEAR(plan.f(1, 1, 0), 65.4, 0.1);
  EXPECT_NEAR(plan.f(0, 0, 0), 3.3, 0.1);
  EXPECT_NEAR(plan.f(1, 1, 1), 100.0, 0.1);
}

TEST(FirstBest, NoSupplyGivesEmptyMarket) {
  const auto e = validate_economy(make_spec(vec2(100, 50), rows2(0.5, 0.5, 0.3, 0.7), caps(0, 0), 40, 0.99, 0.2));
  const auto plan = solve_first_best(e);
  EXPECT_NEAR(plan.objective, 0.0, 1e-12);
  EXPECT_NEAR(plan.total_mass(), 0.0, 1e-12);
  EXPECT_NEAR(plan.f.sum(), 0.0, 1e-12);
}

TEST(Parm, UnbalancedSmallOrigin) {
  const auto out = solve_parm(unbalanced_small_origin());
  const auto& p = out.plan;
  EXPECT_NEAR(p.f(0, 1, 0), 18.8, 0.1);
  EXPECT_NEAR(p.y(0, 1, 0), 16.2, 0.1);
  EXPECT_NEAR(p.f(1, 0, 0), 35.0, 0.1);
  EXPECT_NEAR(p.f(1, 1, 0), 6.2, 0.1);
  EXPECT_NEAR(p.f(0, 0, 0), 6.2, 0.1);
  EXPECT_NEAR(p.f(1, 1, 1), 100.0, 0.1);
}

TEST(Parm, LocalTripsOneType) {
  const auto out = solve_parm(local_trips_one_type());
  EXPECT_NEAR(out.plan.x(0, 1), 80.0, 0.5);
  EXPECT_NEAR(out.plan.x(1, 1), 120.0, 0.5);
  EXPECT_TRUE(out.penalties.undefined[0]);
  EXPECT_EQ(out.penalties.penalty(0), 0.0);
}

TEST(Parm, LocalTripsSmallPreferred) {
  const auto out = solve_parm(local_trips_small_preferred());
  EXPECT_NEAR(out.plan.f(0, 0, 1), 100.0, 0.5);
  EXPECT_NEAR(out.plan.f(1, 1, 1), 50.0, 0.5);
  EXPECT_NEAR(out.plan.y(1, 1, 1), 50.0, 0.5);
}

TEST(Parm, DisconnectedChains) {
  const auto out = solve_parm(disconnected_chains());
  EXPECT_NEAR(out.plan.x(0, 0), 34.0, 0.5);
  EXPECT_NEAR(out.plan.x(1, 0), 25.0, 0.5);
  EXPECT_NEAR(out.plan.x(1, 1), 5.0, 0.5);
  EXPECT_NEAR(out.penalties.p_raw(1, 0), 5.482, 5e-3);
  EXPECT_NEAR(out.penalties.p_raw(0, 0), -0.32, 5e-3);
  EXPECT_NEAR(out.penalties.penalty(0), 5.482, 5e-3);
}

TEST(Porm, UnbalancedSmallOriginPerType) {
  const auto out = solve_porm(unbalanced_small_origin());
  const auto& p = out.plan;
  EXPECT_NEAR(p.f(0, 1, 0), 7.3, 0.1);
  EXPECT_NEAR(p.f(1, 0, 0), 7.3, 0.1);
  EXPECT_NEAR(p.f(1, 1, 0), 84.0, 0.1);
  EXPECT_NEAR(p.f(0, 0, 0), 1.4, 0.1);
  EXPECT_NEAR(p.f(1, 1, 1), 84.0, 0.1);
}

TEST(Porm, LocalTrips) {
  const auto a = solve_porm(local_trips_one_type()).plan;
  EXPECT_NEAR(a.served(0, 0), 100.0, 0.5);
  EXPECT_NEAR(a.served(1, 1), 100.0, 0.5);
  const auto b = solve_porm(local_trips_small_preferred()).plan;
  EXPECT_NEAR(b.served(0, 0), 181.8, 0.5);
  EXPECT_NEAR(b.served(1, 1), 18.2, 0.5);
}

TEST(Porm, MatchesFirstBestWithoutPreference) {
  const auto e = validate_economy(make_spec(vec2(300, 120), rows2(0.4, 0.6, 0.7, 0.3), caps(0, 90), 40, 0.99, 0.0));
  const auto fb = solve_first_best(e);
  const auto porm = solve_porm(e);
  EXPECT_NEAR(porm.plan.objective, fb.objective, 1e-6 * std::abs(fb.objective));
}

TEST(Revenue, MatchesProgramObjective) {
  for (const auto& e : {unbalanced_small_origin(), local_trips_one_type(), local_trips_small_preferred(),
                        disconnected_chains()}) {
    const auto out = solve_parm(e);
    EXPECT_NEAR(revenue(out), out.plan.objective, 1e-8 * std::max(1.0, std::abs(out.plan.objective)));
    EXPECT_NEAR(program_objective(e, out.plan), out.plan.objective, 1e-8 * std::max(1.0, std::abs(out.plan.objective)));
    const auto fb = solve_first_best(e);
    EXPECT_GE(fb.objective, out.plan.objective - 1e-8 * std::max(1.0, std::abs(fb.objective)));
  }
}

TEST(Symmetric, ParmMatchesFirstBest) {
  const auto e = validate_economy(make_spec(vec2(1000, 1000), rows2(0.5, 0.5, 0.5, 0.5), caps(100, 60), 40, 0.99, 0.2));
  ASSERT_TRUE(is_symmetric(e));
  const auto fb = solve_first_best(e);
  const auto parm = solve_parm(e);
  EXPECT_NEAR(parm.plan.objective, fb.objective, 1e-6 * std::abs(fb.objective));
}
