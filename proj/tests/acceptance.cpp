// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace qcert;
namespace qt = qcert::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void run(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += fmt(" (over time budget %.0f s)", budget_s);
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %-28s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
}

ConfidenceRegion region(const Povm& e, const RealVector& f, double eps) { return {e, f, eps, 0.0, 0.003}; }

Povm rotated_z(double g) {
  return noisy_povm({noise_channel(NoiseModel::rotation, 2.0 * g)}, {computational_povm(1)});
}

Outcome coverage() {
  RngStream rng(1001);
  const double rate = bhc_coverage_trial(RealVector::Constant(4, 0.25), 100, 0.05, 10000, rng);
  return {rate <= 0.05, fmt("violation rate %.4f", rate)};
}

Outcome ordering() {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> outcomes(2, 5);
  std::uniform_real_distribution<double> w(0.01, 0.5);
  const double tol = 1e-9;
  double worst = -1e300;
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index d = i % 2 == 0 ? 2 : 4;
    const auto m = static_cast<std::size_t>(outcomes(rng));
    const Povm e = qt::random_povm(d, m, rng);
    const Povm f = qt::perturbed_povm(e, w(rng), rng);
    const double exact = d_op_exact(e, f).value;
    const double norm = d_op_norm_bound(e, f).value;
    const double frob = d_op_frobenius_bound(e, f).value;
    worst = std::max({worst, exact - norm, norm - frob});
    if (exact > norm + tol || norm > frob + tol) ++bad;

    const Povm e1 = qt::random_povm(2, 2 + static_cast<std::size_t>(i % 2), rng);
    const Povm f1 = qt::perturbed_povm(e1, w(rng), rng);
    const Povm e2 = qt::random_povm(2, 2 + static_cast<std::size_t>(i % 3), rng);
    const Povm f2 = qt::perturbed_povm(e2, w(rng), rng);
    const double product = d_op_exact(tensor_povm({e1, e2}), tensor_povm({f1, f2})).value;
    const double local = d_op_local_bound({{e1, f1}, {e2, f2}}).value;
    worst = std::max(worst, product - local);
    if (product > local + tol) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " violations, worst margin " + fmt("%.3g", worst)};
}

Outcome two_design_equality() {
  std::mt19937_64 rng(1003);
  const auto design = stabilizer_design(1);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Povm e = qt::random_povm(2, 2 + static_cast<std::size_t>(i % 4), rng);
    const Povm f = qt::perturbed_povm(e, 0.3, rng);
    worst = std::max(worst, std::abs(d_op_two_design_estimate(e, f, design).value - d_op_frobenius_bound(e, f).value));
  }
  return {worst <= 1e-9, fmt("max |estimate - frobenius| %.3g", worst)};
}

Outcome rotated_basis() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double g = -3.0 + 6.2 * i / 19.0;
    const Povm z = computational_povm(1), r = rotated_z(g);
    const double truth = std::abs(std::sin(g));
    for (double v : {d_op_exact(z, r).value, d_op_norm_bound(z, r).value, d_op_fidelity_bound(z, r).value})
      worst = std::max(worst, std::abs(v - truth));
  }
  return {worst <= 1e-9, fmt("max deviation from |sin g| %.3g", worst)};
}

Outcome solver_vs_oracle() {
  std::mt19937_64 rng(1005);
  int bad = 0, feasible = 0;
  double worst_gap = 0.0, worst_over = -1e300;
  for (int i = 0; i < 50; ++i) {
    const auto inst = qt::random_qubit_instance(rng);
    const double optimum = qt::QubitRegionOracle(inst.povm, inst.f, inst.eps, inst.c).solve();
    const CertifiedBound b = certify(region(inst.povm, inst.f, inst.eps), Observable(inst.c), Direction::min);
    if (std::isnan(optimum)) {
      if (b.status != SolveStatus::infeasible) ++bad;
      continue;
    }
    ++feasible;
    const double gap = std::abs(b.dual_bound - optimum);
    worst_gap = std::max(worst_gap, gap / (1.0 + spectral_norm(inst.c)));
    worst_over = std::max(worst_over, b.dual_bound - optimum);
    if (!(gap <= 1e-3 * (1.0 + spectral_norm(inst.c))) || b.dual_bound > optimum + 1e-9) ++bad;
  }
  std::ostringstream s;
  s << feasible << " feasible, " << bad << " mismatches, max scaled gap " << fmt("%.3g", worst_gap)
    << ", max overshoot " << fmt("%.3g", worst_over);
  return {bad == 0, s.str()};
}

Outcome vacuous_radius() {
  std::mt19937_64 rng(1006);
  double worst = 0.0;
  for (Eigen::Index d : {2, 3, 4, 8, 16, 32}) {
    const Povm e = qt::random_povm(d, 4, rng);
    const ComplexMatrix c = qt::random_hermitian(d, rng);
    const CertifiedBound b = certify(region(e, RealVector::Constant(4, 0.25), 2.0), Observable(c), Direction::min);
    worst = std::max(worst, std::abs(b.dual_bound - qt::eigenvalues_oracle(c)(0)));
  }
  return {worst <= 1e-6, fmt("max |bound - lambda_min| %.3g", worst)};
}

Outcome magnetization() {
  ExperimentConfig c = default_config(ExperimentKind::magnetization);
  c.seed = 2;
  c.n_trials = 20;
  const auto r = run_magnetization(c);
  double lowest_with = 1e300, lowest_without = 1e300;
  for (double g : c.gamma_grid) {
    lowest_with = std::min(lowest_with, r.find("eps1+eps2 N=2^12", g)->median);
    if (g <= std::numbers::pi / 2.0) lowest_without = std::min(lowest_without, r.find("eps1 N=2^12", g)->median);
  }
  const bool pass = lowest_with >= 1.0 - 1e-3 && lowest_without < 0.5;
  return {pass, fmt("min eps1+eps2 median %.6f", lowest_with) +
                    fmt(", min eps1 median on [0, pi/2] %.4f", lowest_without) + " (20 trials)"};
}

Outcome witness() {
  ExperimentConfig c = default_config(ExperimentKind::witness);
  c.seed = 3;
  c.n_trials = 20;
  c.shots_grid = {1U << 18};
  const auto r = run_witness(c);
  const double n = 1U << 18;
  const double a = r.find("phi-phi eps1", n)->median;
  const double b = r.find("phi-phi eps1+eps2", n)->median;
  const double e = r.find("phi+ eps1+eps2", n)->median;
  return {a > 1.0 && b <= 1.0 && e > 1.0,
          fmt("phi-phi eps1 %.4f", a) + fmt(", phi-phi eps1+eps2 %.4f", b) + fmt(", phi+ eps1+eps2 %.4f", e)};
}

Outcome fidelity() {
  bool pass = true;
  std::ostringstream s;
  const std::uint64_t grid[] = {1U << 10, 1U << 14, 1U << 18};
  for (NoiseModel ch : {NoiseModel::depolarizing, NoiseModel::amplitude_damping, NoiseModel::phase_damping,
                        NoiseModel::rotation}) {
    ExperimentConfig c = default_config(ExperimentKind::fidelity);
    c.seed = 4;
    c.n_trials = 20;
    c.channel = ch;
    c.gamma_grid = {0.1};
    c.shots_grid = {grid[0], grid[1], grid[2]};
    const auto r = run_fidelity(c);
    const std::string curve = std::string(to_string(ch)) + " gamma=0.1";
    double prev = -1e300;
    bool monotone = true;
    s << to_string(ch) << " [";
    for (std::size_t i = 0; i < 3; ++i) {
      const double m = r.find(curve, static_cast<double>(grid[i]))->median;
      if (m < prev - 1e-9) monotone = false;
      prev = m;
      s << fmt(i ? " %.4f" : "%.4f", m);
    }
    const bool ok = monotone && prev > 0.5;
    s << "] eps2=" << fmt("%.3f", r.trials.front().eps2) << " (" << r.trials.front().eps2_source << ")"
      << (ok ? "" : " <- fails") << "; ";
    pass = pass && ok;
  }
  return {pass, s.str()};
}

Outcome determinism() {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig f = default_config(ExperimentKind::fidelity);
  f.n_trials = 4;
  f.shots_grid = {1U << 10, 1U << 16};
  f.gamma_grid = {0.05};
  configs.push_back(f);
  ExperimentConfig m = default_config(ExperimentKind::magnetization);
  m.n_trials = 2;
  m.n_qubits = 3;
  m.gamma_grid = {0.0, 1.0};
  configs.push_back(m);
  ExperimentConfig w = default_config(ExperimentKind::witness);
  w.n_trials = 4;
  w.shots_grid = {1U << 12};
  configs.push_back(w);
  int same = 0;
  for (const auto& c : configs) {
    const auto a = run_experiment(c), b = run_experiment(c);
    if (summary_csv(a) == summary_csv(b) && trials_csv(a) == trials_csv(b)) ++same;
  }
  return {same == 3, std::to_string(same) + "/3 experiments byte-identical"};
}

} // namespace

int main() {
  run(1, "bhc-coverage", 10, coverage);
  run(2, "distance-ordering", 60, ordering);
  run(3, "two-design-equals-frobenius", 0, two_design_equality);
  run(4, "rotated-basis-closed-form", 0, rotated_basis);
  run(5, "solver-vs-oracle", 300, solver_vs_oracle);
  run(6, "vacuous-radius", 0, vacuous_radius);
  run(7, "magnetization", 600, magnetization);
  run(8, "witness", 600, witness);
  run(9, "fidelity", 900, fidelity);
  run(10, "determinism", 0, determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
