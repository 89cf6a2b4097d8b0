#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracle/brute_force.hpp"
#include "parm/mechanisms.hpp"

using namespace parm;
using namespace parm::testing;

namespace {

Economy small_random(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> th(4.0, 30.0), s(1.0, 15.0), frac(0.0, 0.9);
  return validate_economy(
      make_spec(vec2(th(rng), th(rng)), random_alpha(2, rng), caps(s(rng), s(rng)), 40, 0.99, frac(rng)));
}

oracle::Masses masses_of(const MarketPlan& plan) {
  oracle::Masses m;
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 2; ++t) m.x[i][t] = plan.x(i, t);
  return m;
}

}  // namespace

TEST(Oracle, CellRevenuePeaksAtHalfDemand) {
  EXPECT_DOUBLE_EQ(oracle::cell_revenue(100, 40), 10.0);
  EXPECT_DOUBLE_EQ(oracle::cell_revenue(10, 40), 7.5);
  EXPECT_DOUBLE_EQ(oracle::cell_revenue(10, 0), 0.0);
}

TEST(Oracle, EmptyMassesAreWorthNothing) {
  std::mt19937_64 rng(1);
  EXPECT_DOUBLE_EQ(oracle::value_at(small_random(rng), oracle::Masses{}), 0.0);
}

TEST(Oracle, FirstBestAgreesWithGrid) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = small_random(rng);
    const auto plan = solve_first_best(e);
    const auto grid = oracle::grid_search(e, 0.5, false);
    const double scale = std::max(1.0, std::abs(plan.objective));
    EXPECT_LE(grid.best, plan.objective + 1e-7 * scale) << "trial " << trial;
    EXPECT_LE(plan.objective - grid.best, oracle::discretization_bound(e, 0.5)) << "trial " << trial;
    EXPECT_NEAR(oracle::value_at(e, masses_of(plan)), plan.objective, 1e-6 * scale) << "trial " << trial;
  }
}

TEST(Oracle, ParmAgreesWithPluralityGrid) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = small_random(rng);
    const auto out = solve_parm(e);
    const auto grid = oracle::grid_search(e, 0.5, true);
    const double scale = std::max(1.0, std::abs(out.plan.objective));
    EXPECT_LE(grid.best, out.plan.objective + 1e-7 * scale) << "trial " << trial;
    EXPECT_LE(out.plan.objective - grid.best, oracle::discretization_bound(e, 0.5)) << "trial " << trial;
    EXPECT_NEAR(oracle::value_at(e, masses_of(out.plan)), out.plan.objective, 1e-6 * scale) << "trial " << trial;
  }
}
