#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parm/errors.hpp"

namespace parm {

using Location = int;
using DriverType = int;

/// Driver mass available for one preference type. Either a finite
/// nonnegative mass or explicitly unbounded.
class SupplyCap {
 public:
  constexpr SupplyCap() = default;
  static constexpr SupplyCap of(double mass) { return SupplyCap(mass, false); }
  static constexpr SupplyCap unbounded() { return SupplyCap(std::numeric_limits<double>::infinity(), true); }

  constexpr bool is_unbounded() const { return unbounded_; }
  constexpr double mass() const { return mass_; }

  friend constexpr bool operator==(const SupplyCap&, const SupplyCap&) = default;

 private:
  constexpr SupplyCap(double mass, bool unbounded) : mass_(mass), unbounded_(unbounded) {}
  double mass_ = 0.0;
  bool unbounded_ = false;
};

/// Raw, unchecked market primitives. Turn into an Economy via validate_economy.
struct EconomySpec {
  int n = 0;
  Eigen::VectorXd theta;      // rider mass per origin
  Eigen::MatrixXd alpha;      // destination shares, rows sum to one
  std::vector<SupplyCap> supply;  // driver mass per preferred location
  double w = 0.0;             // lifetime outside option
  double delta = 0.0;         // per-period discount
  double idio = 0.0;          // per-period utility at the preferred location
};

struct DemandCell {
  Location origin = 0;
  Location dest = 0;
  double mass = 0.0;
};

class Economy;
Economy validate_economy(const EconomySpec& raw);

/// Validated, immutable market primitives shared by all solvers.
class Economy {
 public:
  int size() const { return spec_.n; }
  const Eigen::VectorXd& theta() const { return spec_.theta; }
  const Eigen::MatrixXd& alpha() const { return spec_.alpha; }
  double theta(Location i) const { return spec_.theta(i); }
  double alpha(Location i, Location j) const { return spec_.alpha(i, j); }
  const std::vector<SupplyCap>& supply() const { return spec_.supply; }
  const SupplyCap& supply(DriverType t) const { return spec_.supply[static_cast<std::size_t>(t)]; }
  double outside_option() const { return spec_.w; }
  double discount() const { return spec_.delta; }
  double idio() const { return spec_.idio; }

  /// W = w(1 - delta): the per-period equivalent of the outside option.
  double per_period_outside_option() const { return spec_.w * (1.0 - spec_.delta); }

  /// Rider mass from i to j when every rider is served (theta_i * alpha_ij).
  double potential_demand(Location i, Location j) const { return spec_.theta(i) * spec_.alpha(i, j); }

  DemandCell cell(Location i, Location j) const { return {i, j, potential_demand(i, j)}; }

  std::vector<DemandCell> cells() const {
    std::vector<DemandCell> out;
    out.reserve(static_cast<std::size_t>(size() * size()));
    for (Location i = 0; i < size(); ++i)
      for (Location j = 0; j < size(); ++j) out.push_back(cell(i, j));
    return out;
  }

  double total_theta() const { return spec_.theta.sum(); }

  bool has_unbounded_supply() const {
    for (const auto& s : spec_.supply)
      if (s.is_unbounded()) return true;
    return false;
  }

  /// Per-type supply used inside optimization programs: unbounded types are
  /// capped at the total rider mass, which an optimum never reaches.
  double effective_supply(DriverType t) const {
    const auto& s = supply(t);
    return s.is_unbounded() ? total_theta() : s.mass();
  }

  const EconomySpec& spec() const { return spec_; }

  /// Copy of the underlying primitives for building perturbed economies.
  EconomySpec to_spec() const { return spec_; }

 private:
  friend Economy validate_economy(const EconomySpec& raw);
  explicit Economy(EconomySpec spec) : spec_(std::move(spec)) {}
  EconomySpec spec_;
};

inline constexpr double kStochasticTol = 1e-12;

inline Economy validate_economy(const EconomySpec& raw) {
  std::vector<Violation> bad;
  auto add = [&](Errc code, const std::string& detail) { bad.push_back({code, detail}); };

  if (raw.n <= 0) {
    add(Errc::DimensionMismatch, "n must be positive");
    throw ValidationError(std::move(bad));
  }
  const auto n = static_cast<Eigen::Index>(raw.n);
  if (raw.theta.size() != n) add(Errc::DimensionMismatch, "theta has wrong length");
  if (raw.alpha.rows() != n || raw.alpha.cols() != n) add(Errc::DimensionMismatch, "alpha must be n x n");
  if (raw.supply.size() != static_cast<std::size_t>(raw.n)) add(Errc::DimensionMismatch, "supply has wrong length");
  if (!bad.empty()) throw ValidationError(std::move(bad));

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(raw.theta(i) >= 0.0) || !std::isfinite(raw.theta(i))) {
      std::ostringstream os;
      os << "theta[" << i << "] = " << raw.theta(i);
      add(Errc::NegativeMass, os.str());
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    bool in_range = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = raw.alpha(i, j);
      if (!(a >= 0.0 && a <= 1.0)) in_range = false;
      row += a;
    }
    if (!in_range || std::abs(row - 1.0) > kStochasticTol) {
      std::ostringstream os;
      os << "alpha row " << i << " sums to " << row;
      if (!in_range) os << " with an entry outside [0,1]";
      add(Errc::NonStochasticAlpha, os.str());
    }
  }
  for (std::size_t t = 0; t < raw.supply.size(); ++t) {
    const auto& s = raw.supply[t];
    if (!s.is_unbounded() && !(s.mass() >= 0.0 && std::isfinite(s.mass()))) {
      std::ostringstream os;
      os << "supply[" << t << "] = " << s.mass();
      add(Errc::NegativeMass, os.str());
    }
  }
  if (!(raw.w > 0.0) || !std::isfinite(raw.w)) add(Errc::NegativeMass, "outside option w must be positive");
  if (!(raw.idio >= 0.0) || !std::isfinite(raw.idio)) add(Errc::NegativeMass, "idiosyncratic utility must be nonnegative");

  const bool delta_ok = raw.delta > 0.0 && raw.delta < 1.0;
  if (!delta_ok) add(Errc::DeltaOutOfRange, "delta must lie in (0,1)");
  if (delta_ok && raw.idio >= 0.0 && raw.idio / (1.0 - raw.delta) >= raw.w) {
    std::ostringstream os;
    os << "I/(1-delta) = " << raw.idio / (1.0 - raw.delta) << " is not below w = " << raw.w;
    add(Errc::IdioExceedsOutsideOption, os.str());
  }

  if (!bad.empty()) throw ValidationError(std::move(bad));
  return Economy(raw);
}

/// Trips demanded from i to j at price p under uniform[0,1] rider values.
inline double demand_at_price(const Economy& e, Location i, Location j, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "price " << p << " outside [0,1]";
    throw Error(Errc::PriceOutOfRange, os.str());
  }
  return e.potential_demand(i, j) * (1.0 - p);
}

/// All origins carry equal mass and all destination shares are equal.
inline bool is_symmetric(const Economy& e) {
  const double t0 = e.theta(0);
  const double a0 = e.alpha(0, 0);
  for (Location i = 0; i < e.size(); ++i) {
    if (std::abs(e.theta(i) - t0) > kStochasticTol) return false;
    for (Location j = 0; j < e.size(); ++j)
      if (std::abs(e.alpha(i, j) - a0) > kStochasticTol) return false;
  }
  return true;
}

/// Convenience for the common case where I is given as a fraction of W.
inline EconomySpec make_spec(Eigen::VectorXd theta, Eigen::MatrixXd alpha, std::vector<SupplyCap> supply, double w,
                             double delta, double idio_fraction_of_W) {
  EconomySpec s;
  s.n = static_cast<int>(theta.size());
  s.theta = std::move(theta);
  s.alpha = std::move(alpha);
  s.supply = std::move(supply);
  s.w = w;
  s.delta = delta;
  s.idio = idio_fraction_of_W * w * (1.0 - delta);
  return s;
}

}  // namespace parm
