// hadest: robust OLS variance estimation from the command line.
//
//   hadest fit --x X.csv --y y.csv [--method hadamard --method mw] [--alpha 0.05]
//              [--dof-adjust] [--clamp] [--out fit.csv] [--format csv|json]
//   hadest simulate --config exp.json [--seed 42] [--threads 4] [--out res.csv]
//   hadest diagnose --x X.csv [--sigma sigma.csv] [--out report.json]
//
// Exit codes: 0 ok, 2 invalid input, 3 singular Q⊙Q, 4 rank-deficient
// design, 5 runtime failure.

#include <iostream>

#include <CLI11.hpp>

#include "hadest/cli.hpp"

namespace hc = hadest::cli;

int main(int argc, char** argv) {
  CLI::App app{"Heteroskedasticity-robust variance estimation for OLS"};
  app.require_subcommand(1);

  hc::FitOptions fit;
  std::string fit_format = "csv";
  auto* fit_cmd = app.add_subcommand("fit", "Fit OLS and report variance estimates and intervals");
  fit_cmd->add_option("--x", fit.x_path, "Design matrix CSV (header row, n x p)")->required();
  fit_cmd->add_option("--y", fit.y_path, "Response CSV (header row, one column)")->required();
  fit_cmd->add_option("--method", fit.methods,
                      "white, mw or hadamard; repeatable, the first drives ci_lower/ci_upper")
      ->take_all();
  fit_cmd->add_option("--alpha", fit.alpha, "Interval level is 1 - alpha")->capture_default_str();
  fit_cmd->add_flag("--dof-adjust", fit.dof_adjust, "Student-t reference for Hadamard intervals");
  fit_cmd->add_flag("--clamp", fit.clamp, "Report negative Hadamard variances as zero");
  fit_cmd->add_option("--out", fit.out, "Output path (default stdout)");
  fit_cmd->add_option("--format", fit_format, "csv or json")->capture_default_str();

  hc::SimulateOptions sim;
  std::string sim_format = "csv";
  std::uint64_t seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a seeded Monte-Carlo experiment");
  sim_cmd->add_option("--config", sim.config_path, "Experiment configuration JSON")->required();
  auto* seed_opt = sim_cmd->add_option("--seed", seed, "Override master_seed");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (default: all cores)");
  sim_cmd->add_option("--out", sim.out,
                      "Result CSV; a summary is written next to it as <stem>.summary.json");
  sim_cmd->add_option("--format", sim_format, "csv or json")->capture_default_str();

  hc::DiagnoseOptions diag;
  std::string sigma_path;
  std::string diag_format = "json";
  auto* diag_cmd = app.add_subcommand("diagnose", "Existence and conditioning report for a design");
  diag_cmd->add_option("--x", diag.x_path, "Design matrix CSV")->required();
  auto* sigma_opt =
      diag_cmd->add_option("--sigma", sigma_path, "Noise variances CSV (one column, n rows)");
  diag_cmd->add_option("--out", diag.out, "Output path (default stdout)");
  diag_cmd->add_option("--format", diag_format, "json")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hc::kInvalidInput;
  }

  try {
    if (fit_cmd->parsed()) {
      fit.format = hc::parse_format(fit_format);
      return hc::cmd_fit(fit, std::cout, std::cerr);
    }
    if (sim_cmd->parsed()) {
      sim.format = hc::parse_format(sim_format);
      if (*seed_opt) sim.seed = seed;
      return hc::cmd_simulate(sim, std::cout, std::cerr);
    }
    diag.format = hc::parse_format(diag_format);
    if (*sigma_opt) diag.sigma_path = sigma_path;
    return hc::cmd_diagnose(diag, std::cout, std::cerr);
  } catch (const hc::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hc::kInvalidInput;
  }
}
