#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "parm/economy.hpp"
#include "parm/errors.hpp"
#include "parm/mechanisms.hpp"
#include "parm/metrics.hpp"
#include "parm/porm_equilibrium.hpp"

namespace parm {

enum class SweepParameter { Theta0, Theta1, AlphaCol0, IFrac, S1 };

inline std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Theta0: return "theta_0";
    case SweepParameter::Theta1: return "theta_1";
    case SweepParameter::AlphaCol0: return "alpha_col0";
    case SweepParameter::IFrac: return "I_frac";
    case SweepParameter::S1: return "s_1";
  }
  return "?";
}

inline std::optional<SweepParameter> parse_sweep_parameter(std::string_view s) {
  for (auto p : {SweepParameter::Theta0, SweepParameter::Theta1, SweepParameter::AlphaCol0, SweepParameter::IFrac,
                 SweepParameter::S1})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

struct MechanismSet {
  bool fb = true;
  bool parm = true;
  bool porm = true;
  bool porm_eq = true;
};

struct SweepSpec {
  EconomySpec base;
  SweepParameter parameter = SweepParameter::Theta0;
  std::vector<double> grid;
  MechanismSet mechanisms;
  SolveOptions solve;
  unsigned threads = 0;  // 0 picks the hardware concurrency
};

/// Evenly spaced points including both ends.
inline std::vector<double> linspace(double from, double to, int points) {
  std::vector<double> g;
  if (points <= 0) return g;
  if (points == 1) return {from};
  for (int k = 0; k < points; ++k) g.push_back(from + (to - from) * k / (points - 1));
  return g;
}

/// Base economy with the swept parameter set to `value`. alpha_col0 sets the
/// share of trips bound for location 0 from every origin; I_frac is I / W.
inline EconomySpec apply_parameter(EconomySpec spec, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::Theta0: spec.theta(0) = value; break;
    case SweepParameter::Theta1: spec.theta(1) = value; break;
    case SweepParameter::AlphaCol0:
      for (int i = 0; i < spec.n; ++i) {
        const double rest = spec.n > 1 ? (1.0 - value) / (spec.n - 1) : 0.0;
        for (int j = 0; j < spec.n; ++j) spec.alpha(i, j) = j == 0 ? value : rest;
      }
      break;
    case SweepParameter::IFrac: spec.idio = value * spec.w * (1.0 - spec.delta); break;
    case SweepParameter::S1: spec.supply[1] = SupplyCap::of(value); break;
  }
  return spec;
}

/// One CSV cell: a number or the error that prevented it.
struct Cell {
  std::optional<double> value;
  std::string error;
};

struct MetricRow {
  double param = 0.0;
  Cell fb_rev, parm_rev, porm_rev, pormeq_rev;
  Cell fb_wel, parm_wel, porm_wel, pormeq_wel;
  Cell parm_gap;
  std::vector<std::string> notes;
};

namespace detail {

template <class F>
void fill(Cell& rev, Cell& wel, std::vector<std::string>& notes, std::string_view tag, F&& compute) {
  try {
    const auto [r, w] = compute();
    rev.value = r;
    wel.value = w;
  } catch (const Error& err) {
    rev.error = wel.error = std::string(to_string(err.code()));
    notes.push_back(std::string(tag) + ": " + err.what());
  }
}

}  // namespace detail

inline MetricRow evaluate_point(const SweepSpec& spec, double value) {
  MetricRow row;
  row.param = value;
  std::optional<Economy> valid;
  try {
    valid = validate_economy(apply_parameter(spec.base, spec.parameter, value));
  } catch (const Error& err) {
    row.notes.push_back(std::string("economy: ") + err.what());
    for (Cell* c : {&row.fb_rev, &row.parm_rev, &row.porm_rev, &row.pormeq_rev, &row.fb_wel, &row.parm_wel,
                    &row.porm_wel, &row.pormeq_wel, &row.parm_gap})
      c->error = std::string(to_string(err.code()));
    return row;
  }
  const Economy& e = *valid;

  const auto& m = spec.mechanisms;
  if (m.fb)
    detail::fill(row.fb_rev, row.fb_wel, row.notes, "FB", [&] {
      const auto plan = solve_first_best(e, spec.solve);
      return std::pair{revenue(plan, preference_compensation(e)), welfare(e, plan)};
    });
  if (m.parm)
    detail::fill(row.parm_rev, row.parm_wel, row.notes, "PARM", [&] {
      const auto out = solve_parm(e, spec.solve);
      row.parm_gap.value = out.plan.solver_gap;
      return std::pair{revenue(out), welfare(e, out.plan)};
    });
  if (m.porm || m.porm_eq) {
    std::optional<PormOutcome> porm;
    Cell porm_rev, porm_wel;
    detail::fill(porm_rev, porm_wel, row.notes, "PORM", [&] {
      porm = solve_porm(e, spec.solve);
      return std::pair{revenue(*porm), welfare(e, porm->plan)};
    });
    if (m.porm) {
      row.porm_rev = porm_rev;
      row.porm_wel = porm_wel;
    }
    if (m.porm_eq) {
      if (porm) {
        detail::fill(row.pormeq_rev, row.pormeq_wel, row.notes, "PORM_EQ", [&] {
          const auto eq = porm_equilibrium(e, porm->plan);
          for (const auto& note : eq.notes) row.notes.push_back("PORM_EQ: " + note);
          return std::pair{eq.revenue, eq.welfare};
        });
      } else {
        row.pormeq_rev = row.pormeq_wel = porm_rev;
      }
    }
  }
  return row;
}

/// Evaluates every grid point, concurrently; rows come back in grid order.
inline std::vector<MetricRow> run_sweep(const SweepSpec& spec) {
  std::vector<MetricRow> rows(spec.grid.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(1, rows.size())));
  auto work = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) rows[k] = evaluate_point(spec, spec.grid[k]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return rows;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << "param,fb_rev,parm_rev,porm_rev,pormeq_rev,fb_wel,parm_wel,porm_wel,pormeq_wel,parm_gap,notes\n";
  const auto cell = [](const Cell& c) { return c.value ? format_number(*c.value) : csv_field(c.error); };
  for (const auto& r : rows) {
    std::string notes;
    for (const auto& n : r.notes) notes += (notes.empty() ? "" : "; ") + n;
    os << format_number(r.param) << ',' << cell(r.fb_rev) << ',' << cell(r.parm_rev) << ',' << cell(r.porm_rev)
       << ',' << cell(r.pormeq_rev) << ',' << cell(r.fb_wel) << ',' << cell(r.parm_wel) << ','
       << cell(r.porm_wel) << ',' << cell(r.pormeq_wel) << ',' << cell(r.parm_gap) << ',' << csv_field(notes)
       << '\n';
  }
}

}  // namespace parm
