#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "parm/economy.hpp"
#include "parm/errors.hpp"

namespace parm {

/// Dense n x n x n array indexed (a, b, c), row-major.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int size() const { return n_; }
  double& operator()(int a, int b, int c) { return data_[index(a, b, c)]; }
  double operator()(int a, int b, int c) const { return data_[index(a, b, c)]; }
  const std::vector<double>& data() const { return data_; }
  double sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

 private:
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b)) *
               static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(c);
  }
  int n_ = 0;
  std::vector<double> data_;
};

enum class Mode { FirstBest, PARM, PORM };

constexpr std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::FirstBest: return "FirstBest";
    case Mode::PARM: return "PARM";
    case Mode::PORM: return "PORM";
  }
  return "?";
}

/// A solved pricing and dispatch outcome. Flows are indexed (origin, dest, reported type);
/// masses x(i, t) are type-t drivers at location i.
struct MarketPlan {
  Mode mode = Mode::FirstBest;
  int n = 0;
  Tensor3 f;
  Tensor3 y;
  Eigen::MatrixXd x;
  Eigen::MatrixXd p;
  double objective = 0.0;
  double solver_gap = 0.0;
  int solver_iterations = 0;
  std::vector<std::string> notes;

  static MarketPlan empty(int n, Mode mode) {
    MarketPlan plan;
    plan.mode = mode;
    plan.n = n;
    plan.f = Tensor3(n);
    plan.y = Tensor3(n);
    plan.x = Eigen::MatrixXd::Zero(n, n);
    plan.p = Eigen::MatrixXd::Ones(n, n);
    return plan;
  }

  double served(Location i, Location j) const {
    double s = 0.0;
    for (int t = 0; t < n; ++t) s += f(i, j, t);
    return s;
  }
  Eigen::MatrixXd served() const {
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) = served(i, j);
    return s;
  }
  double dispatch(Location i, Location j, DriverType t) const { return f(i, j, t) + y(i, j, t); }
  double mass(DriverType t) const { return x.col(t).sum(); }
  double total_mass() const { return x.sum(); }
};

/// Per-dispatch pay c(i, t) for a driver of reported type t leaving location i.
struct CompensationSchedule {
  Eigen::MatrixXd c;
};

/// Pays W - I at the reported preferred location and W elsewhere.
inline CompensationSchedule preference_compensation(const Economy& e) {
  const int n = e.size();
  CompensationSchedule s{Eigen::MatrixXd::Constant(n, n, e.per_period_outside_option())};
  for (int t = 0; t < n; ++t) s.c(t, t) -= e.idio();
  return s;
}

/// Type-blind pay: W for every dispatch.
inline CompensationSchedule flat_compensation(const Economy& e) {
  const int n = e.size();
  return {Eigen::MatrixXd::Constant(n, n, e.per_period_outside_option())};
}

/// Misreport penalties. p_raw(k, t) is the break-even penalty for a type-k driver
/// reporting t; deviation_value(k, t, i) is that driver's value at location i.
struct PenaltySchedule {
  Eigen::VectorXd penalty;
  Eigen::MatrixXd p_raw;
  Tensor3 deviation_value;
  std::vector<bool> undefined;
  std::vector<double> condition;  // reciprocal condition estimate per reported type
  std::vector<std::string> notes;

  static PenaltySchedule zero(int n) {
    PenaltySchedule s;
    s.penalty = Eigen::VectorXd::Zero(n);
    s.p_raw = Eigen::MatrixXd::Zero(n, n);
    s.deviation_value = Tensor3(n);
    s.undefined.assign(static_cast<std::size_t>(n), false);
    s.condition.assign(static_cast<std::size_t>(n), 1.0);
    return s;
  }
};

/// Everything PARM hands to drivers.
struct ParmOutcome {
  MarketPlan plan;
  CompensationSchedule compensation;
  PenaltySchedule penalties;
};

struct PormOutcome {
  MarketPlan plan;
  CompensationSchedule compensation;
};

/// The Markov chain followed by one reported type under a plan.
///
/// Rows for occupied locations hold dispatch probabilities (f+y)/x. Rows for
/// unoccupied locations are completed with a relocation dispatch to the type's
/// own location, which keeps every state's continuation defined.
struct DispatchChain {
  DriverType type = 0;
  double mass = 0.0;
  Eigen::MatrixXd transition;
  Eigen::VectorXd occupancy;  // x_i / x, zero when the type is empty
  std::vector<bool> on_support;
};

inline double support_threshold(const MarketPlan& plan) {
  return 1e-9 * std::max(1.0, plan.x.size() ? plan.x.maxCoeff() : 0.0);
}

inline DispatchChain dispatch_chain(const MarketPlan& plan, DriverType t) {
  const int n = plan.n;
  DispatchChain ch;
  ch.type = t;
  ch.mass = plan.mass(t);
  ch.transition = Eigen::MatrixXd::Zero(n, n);
  ch.occupancy = Eigen::VectorXd::Zero(n);
  ch.on_support.assign(static_cast<std::size_t>(n), false);
  const double tol = support_threshold(plan);
  for (int i = 0; i < n; ++i) {
    const double xi = plan.x(i, t);
    if (xi > tol) {
      ch.on_support[static_cast<std::size_t>(i)] = true;
      for (int j = 0; j < n; ++j) ch.transition(i, j) = plan.dispatch(i, j, t) / xi;
    } else {
      ch.transition(i, t) = 1.0;
    }
    if (ch.mass > tol) ch.occupancy(i) = xi / ch.mass;
  }
  return ch;
}

inline void check_dimensions(const Economy& e, const MarketPlan& plan) {
  const int n = e.size();
  if (plan.n != n || plan.f.size() != n || plan.y.size() != n || plan.x.rows() != n || plan.x.cols() != n ||
      plan.p.rows() != n || plan.p.cols() != n)
    throw Error(Errc::DimensionMismatch, "plan dimensions do not match the economy");
}

}  // namespace parm
