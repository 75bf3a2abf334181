// qcert: command-line front end.
//
//   qcert epsilon --shots N --outcomes m --delta d
//   qcert dop E.povm F.povm [--kind all|exact|norm|frobenius|fidelity|two-design]
//   qcert certify --region r.txt --objective c.txt --direction min|max [--tol t]
//   qcert experiment config.txt [--seed s] [--trials n] [--tol t] [--out-dir d] [--format csv|svg|both]

#include <bit>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcert/qcert.hpp"

namespace {

void print_report(const qcert::DistanceReport& r) {
  std::cout << qcert::to_string(r.kind) << "," << qcert::io::format_double(r.value);
  if (r.std_error > 0.0) std::cout << "," << qcert::io::format_double(r.std_error);
  std::cout << "\n";
}

int run_dop(const std::string& e_path, const std::string& f_path, const std::string& kind) {
  const qcert::Povm e = qcert::io::read_povm(e_path);
  const qcert::Povm f = qcert::io::read_povm(f_path);
  const bool all = kind == "all";
  if (all || kind == "exact") {
    try {
      print_report(qcert::d_op_exact(e, f));
    } catch (const qcert::CutoffError& err) {
      if (!all) throw;
      std::cerr << "exact: " << err.what() << "\n";
    }
  }
  if (all || kind == "norm") print_report(qcert::d_op_norm_bound(e, f));
  if (all || kind == "frobenius") print_report(qcert::d_op_frobenius_bound(e, f));
  if (all || kind == "fidelity") {
    try {
      print_report(qcert::d_op_fidelity_bound(e, f));
    } catch (const qcert::OutcomePreconditionError& err) {
      if (!all) throw;
      std::cerr << "fidelity: " << err.what() << "\n";
    }
  }
  if (all || kind == "two-design") {
    const auto n = std::countr_zero(static_cast<unsigned long long>(e.dim()));
    if ((Eigen::Index{1} << n) == e.dim() && n >= 1 && n <= 4) {
      print_report(qcert::d_op_two_design_estimate(e, f, qcert::stabilizer_design(n), qcert::ExactAverage{}));
    } else if (!all) {
      throw qcert::ValidationError("two-design estimate needs a 1-4 qubit POVM");
    }
  }
  return 0;
}

int run_certify(const std::string& region_path, const std::string& objective_path, const std::string& direction,
                std::optional<double> tol) {
  const qcert::ConfidenceRegion region = qcert::io::read_region(region_path);
  const qcert::Observable c = qcert::io::read_observable(objective_path);
  qcert::SolverSettings settings;
  if (tol) settings.tol = *tol;
  const auto dir = direction == "max" ? qcert::Direction::max : qcert::Direction::min;
  const qcert::CertifiedBound b = qcert::certify(region, c, dir, settings);
  std::cout << qcert::io::bound_csv_header() << "\n" << qcert::io::bound_csv_row(b) << "\n";
  return b.status == qcert::SolveStatus::infeasible ? 3 : 0;
}

int run_experiment(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<int> trials,
                   std::optional<double> tol, const std::string& out_dir, const std::string& format) {
  qcert::ExperimentConfig cfg = qcert::read_config(config_path);
  if (seed) cfg.seed = *seed;
  if (trials) cfg.n_trials = *trials;
  if (tol) cfg.solver.tol = *tol;
  qcert::validate_config(cfg);
  const qcert::ExperimentResult result = qcert::run_experiment(cfg);
  std::filesystem::create_directories(out_dir);
  const std::string stem = std::filesystem::path(config_path).stem().string();
  const std::filesystem::path base = std::filesystem::path(out_dir) / stem;
  if (format == "csv" || format == "both") {
    qcert::emit_csv(result, base.string() + ".csv");
    qcert::emit_trials_csv(result, base.string() + "_trials.csv");
  }
  if (format == "svg" || format == "both") qcert::emit_svg(result, base.string() + ".svg");
  std::cout << qcert::summary_csv(result);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified bounds on quantum properties from imperfect measurements"};
  app.require_subcommand(1);

  std::uint64_t shots = 0, outcomes = 0;
  double delta = 0.0;
  auto* eps = app.add_subcommand("epsilon", "Statistical radius for an m-outcome measurement with N shots");
  eps->add_option("--shots", shots, "number of shots N")->required()->check(CLI::PositiveNumber);
  eps->add_option("--outcomes", outcomes, "number of outcomes m")->required()->check(CLI::PositiveNumber);
  eps->add_option("--delta", delta, "failure probability")->required();

  std::string e_path, f_path, kind = "all";
  auto* dop = app.add_subcommand("dop", "Operational distance between two POVMs");
  dop->add_option("target", e_path, "target POVM file")->required()->check(CLI::ExistingFile);
  dop->add_option("implemented", f_path, "implemented POVM file")->required()->check(CLI::ExistingFile);
  dop->add_option("--kind", kind, "which value to report")
      ->check(CLI::IsMember({"all", "exact", "norm", "frobenius", "fidelity", "two-design"}));

  std::string region_path, objective_path, direction = "min";
  std::optional<double> tol;
  auto* cert = app.add_subcommand("certify", "Certified bound on tr(C rho) over a confidence region");
  cert->add_option("--region", region_path, "region file")->required()->check(CLI::ExistingFile);
  cert->add_option("--objective", objective_path, "objective matrix file")->required()->check(CLI::ExistingFile);
  cert->add_option("--direction", direction, "min or max")->check(CLI::IsMember({"min", "max"}));
  cert->add_option("--tol", tol, "solver tolerance")->check(CLI::PositiveNumber);

  std::string config_path, out_dir = ".", format = "both";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  auto* exp = app.add_subcommand("experiment", "Run an experiment described by a config file");
  exp->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  exp->add_option("--seed", seed, "override the config seed");
  exp->add_option("--trials", trials, "override n_trials")->check(CLI::PositiveNumber);
  exp->add_option("--tol", tol, "solver tolerance")->check(CLI::PositiveNumber);
  exp->add_option("--out-dir", out_dir, "output directory");
  exp->add_option("--format", format, "csv, svg or both")->check(CLI::IsMember({"csv", "svg", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eps) {
      std::cout << qcert::io::format_double(qcert::bhc_epsilon(shots, outcomes, delta)) << "\n";
      return 0;
    }
    if (*dop) return run_dop(e_path, f_path, kind);
    if (*cert) return run_certify(region_path, objective_path, direction, tol);
    if (*exp) return run_experiment(config_path, seed, trials, tol, out_dir, format);
  } catch (const qcert::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
