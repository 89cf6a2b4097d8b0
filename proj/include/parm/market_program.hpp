#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parm/concave_qp.hpp"
#include "parm/economy.hpp"

namespace parm {

/// Index map for the flow variables f[i][j][t], y[i][j][t] and masses x[i][t].
/// Layout: all f, then all y, then all x; each block row-major in (i, j, t).
class MarketVariables {
 public:
  MarketVariables(int locations, int types) : n_(locations), types_(types) {}

  int locations() const { return n_; }
  int types() const { return types_; }

  Eigen::Index f(Location i, Location j, DriverType t) const { return (i * n_ + j) * types_ + t; }
  Eigen::Index y(Location i, Location j, DriverType t) const { return flow_block() + f(i, j, t); }
  Eigen::Index x(Location i, DriverType t) const { return 2 * flow_block() + i * types_ + t; }
  Eigen::Index count() const { return 2 * flow_block() + n_ * types_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out(static_cast<std::size_t>(count()));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int t = 0; t < types_; ++t) {
          const auto suffix = "[" + std::to_string(i) + "][" + std::to_string(j) + "][" + std::to_string(t) + "]";
          out[static_cast<std::size_t>(f(i, j, t))] = "f" + suffix;
          out[static_cast<std::size_t>(y(i, j, t))] = "y" + suffix;
        }
    for (int i = 0; i < n_; ++i)
      for (int t = 0; t < types_; ++t)
        out[static_cast<std::size_t>(x(i, t))] = "x[" + std::to_string(i) + "][" + std::to_string(t) + "]";
    return out;
  }

 private:
  Eigen::Index flow_block() const { return static_cast<Eigen::Index>(n_) * n_ * types_; }
  int n_;
  int types_;
};

struct ProgramOptions {
  bool ic_constraint = false;
  bool preference_aware = true;
};

/// A quadratic program together with the variable layout used to build it.
struct MarketProgram {
  QuadraticProgram qp;
  MarketVariables vars;
  std::vector<double> supply_caps;   // per program type
  std::vector<bool> cap_from_unbounded;
};

/// Encodes the revenue-maximization program: revenue from served riders at
/// market-clearing prices, minus W per employed driver, plus I per driver
/// stationed at its preferred location. Prices are eliminated through
/// p_ij = 1 - F_ij / (theta_i alpha_ij), so each served cell contributes
/// F_ij - F_ij^2 / (theta_i alpha_ij).
///
/// With preference_aware = false all supply is pooled into one type and I is
/// dropped from the objective.
inline MarketProgram build_market_program(const Economy& e, const ProgramOptions& opts) {
  const int n = e.size();
  const int types = opts.preference_aware ? n : 1;
  MarketVariables vars(n, types);
  MarketProgram mp{QuadraticProgram::over(vars.names()), vars, {}, {}};
  auto& qp = mp.qp;
  const auto width = vars.count();
  const double big_w = e.per_period_outside_option();
  const double idio = opts.preference_aware ? e.idio() : 0.0;

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double demand = e.potential_demand(i, j);
      if (demand <= 0.0) {
        for (int t = 0; t < types; ++t) qp.pinned_zero.push_back(vars.f(i, j, t));
        continue;
      }
      QuadraticTerm term;
      term.curvature = -1.0 / demand;
      term.label = "served[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      Eigen::RowVectorXd cap = Eigen::RowVectorXd::Zero(width);
      for (int t = 0; t < types; ++t) {
        qp.linear(vars.f(i, j, t)) = 1.0;
        term.coefficients.emplace_back(vars.f(i, j, t), 1.0);
        cap(vars.f(i, j, t)) = 1.0;
      }
      qp.quadratic.push_back(std::move(term));
      // Served mass cannot exceed potential demand (price stays nonnegative).
      qp.add_ub(cap, demand, "demand[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }

  for (int i = 0; i < n; ++i)
    for (int t = 0; t < types; ++t) {
      qp.linear(vars.x(i, t)) = -big_w + ((opts.preference_aware && i == t) ? idio : 0.0);
    }

  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < types; ++t) {
      const auto tag = "[" + std::to_string(i) + "][" + std::to_string(t) + "]";
      Eigen::RowVectorXd inflow = Eigen::RowVectorXd::Zero(width);
      Eigen::RowVectorXd outflow = Eigen::RowVectorXd::Zero(width);
      inflow(vars.x(i, t)) = 1.0;
      outflow(vars.x(i, t)) = -1.0;
      for (int j = 0; j < n; ++j) {
        inflow(vars.f(j, i, t)) -= 1.0;
        inflow(vars.y(j, i, t)) -= 1.0;
        outflow(vars.f(i, j, t)) += 1.0;
        outflow(vars.y(i, j, t)) += 1.0;
      }
      qp.add_eq(inflow, 0.0, "balance" + tag);
      qp.add_eq(outflow, 0.0, "relocation" + tag);
    }
  }

  for (int t = 0; t < types; ++t) {
    double cap = 0.0;
    bool from_unbounded = false;
    if (opts.preference_aware) {
      cap = e.effective_supply(t);
      from_unbounded = e.supply(t).is_unbounded();
    } else {
      for (int k = 0; k < n; ++k) {
        if (e.supply(k).is_unbounded()) from_unbounded = true;
        else cap += e.supply(k).mass();
      }
      if (from_unbounded) cap = e.total_theta();
    }
    mp.supply_caps.push_back(cap);
    mp.cap_from_unbounded.push_back(from_unbounded);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(width);
    for (int i = 0; i < n; ++i) row(vars.x(i, t)) = 1.0;
    qp.add_ub(row, cap, "supply[" + std::to_string(t) + "]");
  }

  if (opts.ic_constraint && opts.preference_aware) {
    // Reported-type-t drivers spend at least as much time at t as anywhere else.
    for (int t = 0; t < types; ++t)
      for (int i = 0; i < n; ++i) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(width);
        row(vars.x(i, t)) += 1.0;
        row(vars.x(t, t)) -= 1.0;
        qp.add_ub(row, 0.0, "ic[" + std::to_string(i) + "][" + std::to_string(t) + "]");
      }
  }
  return mp;
}

}  // namespace parm
