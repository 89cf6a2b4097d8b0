#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parm/audit.hpp"
#include "parm/economy.hpp"
#include "parm/errors.hpp"
#include "parm/experiments.hpp"
#include "parm/plan.hpp"
#include "parm/porm_equilibrium.hpp"

namespace parm {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void config_error(const std::string& key, const std::string& what) {
  throw Error(Errc::ConfigError, "key '" + key + "': " + what);
}

inline const json& require(const json& j, const std::string& key) {
  if (!j.is_object()) config_error(key, "config must be an object");
  auto it = j.find(key);
  if (it == j.end()) config_error(key, "missing");
  return *it;
}

inline double number(const json& j, const std::string& key) {
  if (!j.is_number()) config_error(key, "expected a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) config_error(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], key + "[" + std::to_string(k) + "]"));
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& err) {
    throw Error(Errc::ConfigError, "'" + path + "' is not valid JSON: " + err.what());
  }
}

}  // namespace detail

/// Reads an economy from its JSON form:
/// {"n": 2, "theta": [..], "alpha": [[..], ..], "supply": [100, "inf"],
///  "w": 40, "delta": 0.99, "I_frac": 0.2}
inline EconomySpec economy_spec_from_json(const json& j) {
  using namespace detail;
  EconomySpec s;
  const json& n = require(j, "n");
  if (!n.is_number_integer() || n.get<int>() < 1) config_error("n", "expected a positive integer");
  s.n = n.get<int>();

  const auto theta = numbers(require(j, "theta"), "theta");
  s.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));

  const json& alpha = require(j, "alpha");
  if (!alpha.is_array() || alpha.size() != static_cast<std::size_t>(s.n))
    config_error("alpha", "expected " + std::to_string(s.n) + " rows");
  s.alpha = Eigen::MatrixXd::Zero(s.n, s.n);
  for (int i = 0; i < s.n; ++i) {
    const auto key = "alpha[" + std::to_string(i) + "]";
    const auto row = numbers(alpha[static_cast<std::size_t>(i)], key);
    if (row.size() != static_cast<std::size_t>(s.n)) config_error(key, "expected " + std::to_string(s.n) + " entries");
    for (int k = 0; k < s.n; ++k) s.alpha(i, k) = row[static_cast<std::size_t>(k)];
  }

  const json& supply = require(j, "supply");
  if (!supply.is_array()) config_error("supply", "expected an array");
  for (std::size_t k = 0; k < supply.size(); ++k) {
    const auto& v = supply[k];
    if (v.is_string() && v.get<std::string>() == "inf") s.supply.push_back(SupplyCap::unbounded());
    else s.supply.push_back(SupplyCap::of(number(v, "supply[" + std::to_string(k) + "]")));
  }

  s.w = number(require(j, "w"), "w");
  s.delta = number(require(j, "delta"), "delta");
  s.idio = number(require(j, "I_frac"), "I_frac") * s.w * (1.0 - s.delta);
  return s;
}

inline Economy load_economy(const std::string& path) {
  return validate_economy(economy_spec_from_json(detail::read_json_file(path)));
}

/// Reads a sweep: {"base": {economy}, "parameter": "theta_0",
/// "grid": [..] or "range": {"from": a, "to": b, "points": k},
/// "mechanisms": ["FB", "PARM", "PORM", "PORM_EQ"]}
inline SweepSpec sweep_spec_from_json(const json& j) {
  using namespace detail;
  SweepSpec s;
  s.base = economy_spec_from_json(require(j, "base"));
  const json& param = require(j, "parameter");
  if (!param.is_string()) config_error("parameter", "expected a string");
  const auto p = parse_sweep_parameter(param.get<std::string>());
  if (!p) config_error("parameter", "unknown parameter '" + param.get<std::string>() + "'");
  s.parameter = *p;

  if (j.contains("grid")) {
    s.grid = numbers(j.at("grid"), "grid");
  } else {
    const json& range = require(j, "range");
    const double from = number(require(range, "from"), "range.from");
    const double to = number(require(range, "to"), "range.to");
    int points = 101;
    if (range.contains("points")) {
      if (!range.at("points").is_number_integer()) config_error("range.points", "expected an integer");
      points = range.at("points").get<int>();
    }
    s.grid = linspace(from, to, points);
  }

  if (j.contains("mechanisms")) {
    s.mechanisms = {false, false, false, false};
    for (const auto& m : j.at("mechanisms")) {
      const auto name = m.is_string() ? m.get<std::string>() : std::string();
      if (name == "FB") s.mechanisms.fb = true;
      else if (name == "PARM") s.mechanisms.parm = true;
      else if (name == "PORM") s.mechanisms.porm = true;
      else if (name == "PORM_EQ") s.mechanisms.porm_eq = true;
      else config_error("mechanisms", "unknown mechanism '" + name + "'");
    }
  }
  return s;
}

inline SweepSpec load_sweep_spec(const std::string& path) { return sweep_spec_from_json(detail::read_json_file(path)); }

// Writers emit JSON by hand so every real carries exactly six decimals.

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  return buf;
}

namespace detail {

inline std::string quoted(const std::string& s) { return json(s).dump(); }

inline std::string matrix(const Eigen::MatrixXd& m, const std::string& indent) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? ",\n" + indent + " " : "") << "[";
    for (Eigen::Index k = 0; k < m.cols(); ++k) os << (k ? ", " : "") << fixed6(m(i, k));
    os << "]";
  }
  return os.str() + "]";
}

inline std::string strings(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + quoted(v[k]);
  return out + "]";
}

inline void write_plan_body(std::ostream& os, const MarketPlan& plan) {
  const int n = plan.n;
  os << "  \"mode\": " << quoted(std::string(to_string(plan.mode))) << ",\n";
  os << "  \"objective\": " << fixed6(plan.objective) << ",\n";
  os << "  \"flows\": [\n";
  bool first = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 0; t < n; ++t) {
        os << (first ? "" : ",\n") << "    {\"origin\": " << i << ", \"dest\": " << j << ", \"type\": " << t
           << ", \"rides\": " << fixed6(plan.f(i, j, t)) << ", \"relocations\": " << fixed6(plan.y(i, j, t)) << "}";
        first = false;
      }
  os << "\n  ],\n";
  os << "  \"mass\": " << matrix(plan.x, "          ") << ",\n";
  os << "  \"prices\": " << matrix(plan.p, "            ") << ",\n";
  os << "  \"notes\": " << strings(plan.notes);
}

}  // namespace detail

inline void write_plan(std::ostream& os, const MarketPlan& plan, const CompensationSchedule* comp = nullptr,
                       const PenaltySchedule* pen = nullptr) {
  os << "{\n";
  detail::write_plan_body(os, plan);
  if (comp) os << ",\n  \"compensation\": " << detail::matrix(comp->c, "                  ");
  if (pen) {
    const int n = static_cast<int>(pen->penalty.size());
    os << ",\n  \"penalties\": {\n    \"P\": [";
    for (int t = 0; t < n; ++t) os << (t ? ", " : "") << fixed6(pen->penalty(t));
    os << "],\n    \"P_raw\": " << detail::matrix(pen->p_raw, "              ") << ",\n    \"undefined\": [";
    for (int t = 0; t < n; ++t) os << (t ? ", " : "") << (pen->undefined[static_cast<std::size_t>(t)] ? "true" : "false");
    os << "],\n    \"deviation_values\": [\n";
    bool first = true;
    for (int k = 0; k < n; ++k)
      for (int t = 0; t < n; ++t)
        for (int i = 0; i < n; ++i) {
          os << (first ? "" : ",\n") << "      {\"true_type\": " << k << ", \"reported\": " << t
             << ", \"location\": " << i << ", \"value\": " << fixed6(pen->deviation_value(k, t, i)) << "}";
          first = false;
        }
    os << "\n    ],\n    \"notes\": " << detail::strings(pen->notes) << "\n  }";
  }
  os << "\n}\n";
}

inline void write_parm(std::ostream& os, const ParmOutcome& o) { write_plan(os, o.plan, &o.compensation, &o.penalties); }
inline void write_porm(std::ostream& os, const PormOutcome& o) { write_plan(os, o.plan, &o.compensation); }

inline void write_report(std::ostream& os, const AuditReport& r) {
  os << "{\n  \"pass\": " << (r.pass ? "true" : "false") << ",\n  \"residuals\": {\"C1\": " << fixed6(r.c1)
     << ", \"C2\": " << fixed6(r.c2) << ", \"C3\": " << fixed6(r.c3) << ", \"C4\": " << fixed6(r.c4)
     << ", \"C5\": " << fixed6(r.c5) << "},\n  \"pi\": " << detail::matrix(r.pi, "         ")
     << ",\n  \"stationary\": [";
  for (Eigen::Index t = 0; t < r.stationary_residuals.size(); ++t)
    os << (t ? ", " : "") << fixed6(r.stationary_residuals(t));
  os << "],\n  \"notes\": " << detail::strings(r.notes) << "\n}\n";
}

inline void write_equilibrium(std::ostream& os, const EquilibriumOutcome& eq) {
  const auto pair = [](const std::array<double, 2>& a) { return "[" + fixed6(a[0]) + ", " + fixed6(a[1]) + "]"; };
  os << "{\n  \"mass\": " << pair(eq.x) << ",\n  \"served\": " << pair(eq.served) << ",\n  \"idle\": "
     << pair(eq.idle) << ",\n  \"prices\": " << pair(eq.prices) << ",\n  \"total_mass\": " << fixed6(eq.total_mass)
     << ",\n  \"revenue\": " << fixed6(eq.revenue) << ",\n  \"welfare\": " << fixed6(eq.welfare)
     << ",\n  \"corner\": " << (eq.corner ? "true" : "false") << ",\n  \"notes\": " << detail::strings(eq.notes)
     << "\n}\n";
}

}  // namespace parm
