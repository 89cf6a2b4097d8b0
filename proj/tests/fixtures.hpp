#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "parm/economy.hpp"

namespace parm::testing {

inline Eigen::MatrixXd rows2(double a00, double a01, double a10, double a11) {
  Eigen::MatrixXd a(2, 2);
  a << a00, a01, a10, a11;
  return a;
}

inline Eigen::VectorXd vec2(double a, double b) { return Eigen::Vector2d(a, b); }

inline std::vector<SupplyCap> caps(double a, double b) { return {SupplyCap::of(a), SupplyCap::of(b)}; }

/// Unbalanced demand toward location 1 with a small location 0.
inline Economy unbalanced_small_origin() {
  return validate_economy(make_spec(vec2(50, 1000), rows2(0.25, 0.75, 0.25, 0.75), caps(100, 100), 40, 0.99, 0.2));
}

/// Within-location trips, equal demand, only drivers who prefer location 1.
inline Economy local_trips_one_type() {
  return validate_economy(make_spec(vec2(1000, 1000), rows2(1, 0, 0, 1), caps(0, 200), 40, 0.99, 0.2));
}

/// Within-location trips, location 1 ten times smaller, drivers prefer location 1.
inline Economy local_trips_small_preferred() {
  return validate_economy(make_spec(vec2(1000, 100), rows2(1, 0, 0, 1), caps(0, 200), 40, 0.99, 0.2));
}

/// Within-location trips with few drivers who prefer location 1: the case
/// where a type-1 driver gains by misreporting unless penalised.
inline Economy disconnected_chains() {
  return validate_economy(make_spec(vec2(100, 100), rows2(1, 0, 0, 1), caps(200, 5), 40, 0.99, 0.2));
}

/// Random row-stochastic matrix with entries bounded away from zero.
inline Eigen::MatrixXd random_alpha(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
    a.row(i) /= a.row(i).sum();
  }
  return a;
}

/// Random symmetric demand: equal origin masses and equal destination shares.
inline EconomySpec random_symmetric_spec(int n, std::mt19937_64& rng, double delta) {
  std::uniform_real_distribution<double> th(20.0, 500.0), s(5.0, 150.0), frac(0.0, 0.9);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(n, th(rng));
  const Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  std::vector<SupplyCap> supply;
  for (int t = 0; t < n; ++t) supply.push_back(SupplyCap::of(s(rng)));
  return make_spec(theta, alpha, supply, 40, delta, frac(rng));
}

inline EconomySpec random_unbounded_spec(int n, std::mt19937_64& rng, double delta) {
  std::uniform_real_distribution<double> th(20.0, 200.0);
  Eigen::VectorXd theta(n);
  for (int i = 0; i < n; ++i) theta(i) = th(rng);
  std::vector<SupplyCap> supply(static_cast<std::size_t>(n), SupplyCap::unbounded());
  std::uniform_real_distribution<double> frac(0.0, 0.9);
  return make_spec(theta, random_alpha(n, rng), supply, 40, delta, frac(rng));
}

}  // namespace parm::testing
