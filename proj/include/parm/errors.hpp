#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parm {

enum class Errc {
  NonStochasticAlpha,
  NegativeMass,
  IdioExceedsOutsideOption,
  DeltaOutOfRange,
  DimensionMismatch,
  PriceOutOfRange,
  FlowExceedsDemand,
  Infeasible,
  Unbounded,
  IterationLimit,
  SingularSystem,
  PenaltyUndefined,
  EmptyType,
  NoDispatchPlan,
  NonConvergence,
  UnsupportedClass,
  ConfigError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NonStochasticAlpha: return "NonStochasticAlpha";
    case Errc::NegativeMass: return "NegativeMass";
    case Errc::IdioExceedsOutsideOption: return "IdioExceedsOutsideOption";
    case Errc::DeltaOutOfRange: return "DeltaOutOfRange";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::PriceOutOfRange: return "PriceOutOfRange";
    case Errc::FlowExceedsDemand: return "FlowExceedsDemand";
    case Errc::Infeasible: return "Infeasible";
    case Errc::Unbounded: return "Unbounded";
    case Errc::IterationLimit: return "IterationLimit";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::PenaltyUndefined: return "PenaltyUndefined";
    case Errc::EmptyType: return "EmptyType";
    case Errc::NoDispatchPlan: return "NoDispatchPlan";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::UnsupportedClass: return "UnsupportedClass";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. Carries a
/// machine-readable code next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct Violation {
  Errc code;
  std::string detail;
};

/// Raised by economy validation; lists every violated invariant, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(violations.empty() ? Errc::ConfigError : violations.front().code, summarize(violations)),
        violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

  bool has(Errc code) const {
    for (const auto& v : violations_)
      if (v.code == code) return true;
    return false;
  }

 private:
  static std::string summarize(const std::vector<Violation>& vs) {
    std::string out;
    for (const auto& v : vs) {
      if (!out.empty()) out += "; ";
      out += std::string(to_string(v.code)) + " (" + v.detail + ")";
    }
    return out;
  }

  std::vector<Violation> violations_;
};

}  // namespace parm
