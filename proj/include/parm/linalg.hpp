#pragma once

#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "parm/errors.hpp"

namespace parm {

inline constexpr double kIllConditioned = 1e-12;  // reciprocal condition number

struct DenseSolve {
  Eigen::VectorXd x;
  double rcond = 1.0;
  bool ill_conditioned() const { return rcond < kIllConditioned; }
};

/// Partial-pivot LU solve with a reciprocal condition estimate.
inline DenseSolve solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const std::string& what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  DenseSolve out;
  out.rcond = lu.rcond();
  out.x = lu.solve(b);
  if (!(out.rcond > 1e-16) || !out.x.allFinite()) {
    std::ostringstream os;
    os << what << " is singular (rcond " << out.rcond << ")";
    throw Error(Errc::SingularSystem, os.str());
  }
  return out;
}

}  // namespace parm
