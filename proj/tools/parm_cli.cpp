// Command-line front end: solve, verify, porm-eq and sweep.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "parm/io.hpp"
#include "parm/parm.hpp"

namespace {

parm::SolveOptions options(bool trace) {
  auto opts = parm::solve_options_from_env();
  if (trace) opts.qp.trace = &std::cerr;
  return opts;
}

int solve(const std::string& config, const std::string& mechanism, bool trace) {
  const auto e = parm::load_economy(config);
  const auto opts = options(trace);
  if (mechanism == "fb") {
    const auto plan = parm::solve_first_best(e, opts);
    const auto comp = parm::preference_compensation(e);
    parm::write_plan(std::cout, plan, &comp);
  } else if (mechanism == "parm") {
    parm::write_parm(std::cout, parm::solve_parm(e, opts));
  } else {
    parm::write_porm(std::cout, parm::solve_porm(e, opts));
  }
  return 0;
}

int verify(const std::string& config, bool trace) {
  const auto e = parm::load_economy(config);
  const auto out = parm::solve_parm(e, options(trace));
  auto report = parm::verify_steady_state(e, out.plan, out.compensation);
  const double pen = parm::penalty_system_residual(e, out.plan, out.penalties);
  double worst_deviation = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < e.size(); ++k)
    for (int b = 0; b < e.size(); ++b) {
      const auto dev = parm::driver_best_response(e, out, k, b);
      worst_deviation = std::max(worst_deviation, dev.expected_value - e.outside_option());
      for (const auto& note : dev.notes) report.notes.push_back(note);
    }
  const bool incentive_ok = worst_deviation <= 1e-6;
  const bool penalties_ok = pen <= parm::kAuditTolerance;
  parm::write_report(std::cout, report);
  std::cerr << "worst residual C1 " << report.c1 << "\n"
            << "worst residual C2 " << report.c2 << "\n"
            << "worst residual C3 " << report.c3 << "\n"
            << "worst residual C4 " << report.c4 << "\n"
            << "worst residual C5 " << report.c5 << "\n"
            << "worst stationary residual " << report.stationary_residuals.maxCoeff() << "\n"
            << "penalty system residual " << pen << "\n"
            << "best deviation gain over w " << worst_deviation << "\n";
  const bool ok = report.pass && incentive_ok && penalties_ok;
  std::cerr << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

int porm_eq(const std::string& config, bool trace) {
  const auto e = parm::load_economy(config);
  const auto porm = parm::solve_porm(e, options(trace));
  parm::write_equilibrium(std::cout, parm::porm_equilibrium(e, porm.plan));
  return 0;
}

int sweep(const std::string& spec_path, const std::string& out_path, unsigned threads) {
  auto spec = parm::load_sweep_spec(spec_path);
  spec.solve = parm::solve_options_from_env();
  spec.threads = threads;
  const auto rows = parm::run_sweep(spec);
  if (out_path.empty() || out_path == "-") {
    parm::write_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    if (!out) throw parm::Error(parm::Errc::ConfigError, "cannot write '" + out_path + "'");
    parm::write_csv(out, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ridesharing pricing mechanisms with driver location preferences"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  bool trace = false;
  app.add_option("--seed", seed, "Recorded for reproducibility; the solvers are deterministic");
  app.add_flag("--trace", trace, "Print solver iterations to stderr");

  std::string config, mechanism = "parm", spec, out;
  unsigned threads = 0;

  auto* solve_cmd = app.add_subcommand("solve", "Solve one economy and print the plan");
  solve_cmd->add_option("--config", config, "Economy JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--mechanism", mechanism, "fb, parm or porm")
      ->check(CLI::IsMember({"fb", "parm", "porm"}));

  auto* verify_cmd = app.add_subcommand("verify", "Audit the PARM solution of an economy");
  verify_cmd->add_option("--config", config, "Economy JSON")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--mechanism", mechanism, "Only parm is audited")->check(CLI::IsMember({"parm"}));

  auto* eq_cmd = app.add_subcommand("porm-eq", "Strategic-driver outcome under PORM prices");
  eq_cmd->add_option("--config", config, "Economy JSON")->required()->check(CLI::ExistingFile);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  sweep_cmd->add_option("--spec", spec, "Sweep JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", out, "CSV path, '-' for stdout");
  sweep_cmd->add_option("--threads", threads, "Worker threads, 0 for all cores");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return solve(config, mechanism, trace);
    if (*verify_cmd) return verify(config, trace);
    if (*eq_cmd) return porm_eq(config, trace);
    if (*sweep_cmd) return sweep(spec, out, threads);
  } catch (const parm::Error& err) {
    std::cerr << "error [" << parm::to_string(err.code()) << "]: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
