#pragma once

// End-to-end certification experiments: preparation fidelity under local
// measurement noise, maximal magnetization under a rotated readout, and an
// entanglement witness measured with tilted observables. Each experiment is
// driven by a flat key-value config and produces median / interquartile
// summaries over independent trials.

#include <algorithm>
#include <bit>
#include <exception>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "certifier.hpp"
#include "distance.hpp"
#include "io.hpp"

namespace qcert {

enum class ExperimentKind { fidelity, magnetization, witness };
enum class WitnessSampling { single_povm, two_setting };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fidelity: return "fidelity";
    case ExperimentKind::magnetization: return "magnetization";
    case ExperimentKind::witness: return "witness";
  }
  return "unknown";
}

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::fidelity;
  std::uint64_t seed = 1;
  int n_trials = 100;
  double delta = 0.003;
  std::vector<std::uint64_t> shots_grid;
  std::vector<double> gamma_grid;
  NoiseModel channel = NoiseModel::rotation;
  double theta_x = 0.01;
  double theta_z = std::numbers::pi / 2.0 - 0.01;
  int n_qubits = 5;
  bool include_eps2 = true;
  EffectConvention effect_convention = EffectConvention::heisenberg;
  WitnessSampling witness_sampling = WitnessSampling::single_povm;
  SolverSettings solver;
};

inline std::vector<std::uint64_t> powers_of_two(int lo, int hi) {
  std::vector<std::uint64_t> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::uint64_t{1} << k);
  return out;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  if (n == 1) return {a};
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

// Defaults that depend on the experiment kind.
inline ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::fidelity:
      c.shots_grid = powers_of_two(8, 20);
      c.gamma_grid = {0.0, 0.05, 0.1, 0.2};
      break;
    case ExperimentKind::magnetization:
      c.shots_grid = {std::uint64_t{1} << 12};
      c.gamma_grid = linspace(0.0, std::numbers::pi, 10);
      break;
    case ExperimentKind::witness:
      c.shots_grid = powers_of_two(8, 20);
      break;
  }
  return c;
}

namespace detail {

// Number with optional "pi" factors: 0.3, pi, pi/2, 2*pi/3, -pi.
inline double parse_angle(std::string tok, const std::string& ctx) {
  tok = io::trim(tok);
  const auto p = tok.find("pi");
  if (p == std::string::npos) return io::parse_double(tok, ctx);
  double factor = 1.0;
  std::string left = tok.substr(0, p);
  if (left == "-") factor = -1.0;
  else if (!left.empty()) {
    if (left.back() != '*') throw ValidationError(ctx + ": cannot parse '" + tok + "'");
    factor = io::parse_double(left.substr(0, left.size() - 1), ctx);
  }
  double value = factor * std::numbers::pi;
  std::string right = tok.substr(p + 2);
  if (!right.empty()) {
    if (right.front() != '/') throw ValidationError(ctx + ": cannot parse '" + tok + "'");
    value /= io::parse_double(right.substr(1), ctx);
  }
  return value;
}

inline std::vector<double> parse_real_grid(const std::string& value, const std::string& ctx) {
  const std::string v = io::trim(value);
  if (v.rfind("linspace(", 0) == 0 && v.back() == ')') {
    std::string inner = v.substr(9, v.size() - 10);
    std::vector<std::string> parts;
    std::stringstream ss(inner);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(part);
    if (parts.size() != 3) throw ValidationError(ctx + ": linspace needs (start, stop, count)");
    const double n = io::parse_double(io::trim(parts[2]), ctx);
    if (n < 1 || n != std::floor(n)) throw ValidationError(ctx + ": linspace count must be a positive integer");
    return linspace(parse_angle(parts[0], ctx), parse_angle(parts[1], ctx), static_cast<int>(n));
  }
  std::string s = v;
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_angle(tok, ctx));
  return out;
}

// Positive integers, "2^k" allowed.
inline std::vector<std::uint64_t> parse_shots_grid(const std::string& value, const std::string& ctx) {
  std::string s = value;
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  std::istringstream in(s);
  std::vector<std::uint64_t> out;
  std::string tok;
  while (in >> tok) {
    std::uint64_t n = 0;
    if (tok.rfind("2^", 0) == 0) {
      const double e = io::parse_double(tok.substr(2), ctx);
      if (e < 0 || e > 40 || e != std::floor(e)) throw ValidationError(ctx + ": bad exponent in '" + tok + "'");
      n = std::uint64_t{1} << static_cast<int>(e);
    } else {
      const double d = io::parse_double(tok, ctx);
      if (d < 1 || d != std::floor(d)) throw ValidationError(ctx + ": shots must be positive integers");
      n = static_cast<std::uint64_t>(d);
    }
    out.push_back(n);
  }
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(ctx + ": expected a boolean, got '" + v + "'");
}

} // namespace detail

inline void validate_config(const ExperimentConfig& c) {
  if (c.shots_grid.empty()) throw ValidationError("config: shots_grid is empty");
  if (c.gamma_grid.empty() && c.experiment != ExperimentKind::witness)
    throw ValidationError("config: gamma_grid is empty");
  if (!(c.delta > 0.0 && c.delta <= 1.0)) throw ValidationError("config: delta must lie in (0, 1]");
  if (c.n_trials < 1) throw ValidationError("config: n_trials must be at least 1");
  if (c.n_qubits < 1 || c.n_qubits > 6) throw ValidationError("config: n_qubits must lie in [1, 6]");
  for (auto n : c.shots_grid)
    if (n == 0) throw ValidationError("config: shots must be positive");
  if (c.experiment == ExperimentKind::fidelity && c.channel != NoiseModel::rotation)
    for (double g : c.gamma_grid)
      if (g < 0.0 || g > 1.0) throw ValidationError("config: gamma must lie in [0, 1] for this channel");
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& ctx = "config") {
  auto kv = io::read_key_values(in, ctx);
  auto it = kv.find("experiment");
  if (it == kv.end()) throw ValidationError(ctx + ": missing key 'experiment'");
  ExperimentKind kind;
  if (it->second == "fidelity") kind = ExperimentKind::fidelity;
  else if (it->second == "magnetization") kind = ExperimentKind::magnetization;
  else if (it->second == "witness") kind = ExperimentKind::witness;
  else throw ValidationError(ctx + ": unknown experiment '" + it->second + "'");
  ExperimentConfig c = default_config(kind);
  kv.erase(it);
  for (const auto& [key, value] : kv) {
    const std::string where = ctx + ": " + key;
    if (key == "seed") {
      const double s = io::parse_double(value, where);
      if (s < 0 || s != std::floor(s)) throw ValidationError(where + ": seed must be a non-negative integer");
      c.seed = std::stoull(value);
    } else if (key == "n_trials") {
      c.n_trials = static_cast<int>(io::parse_double(value, where));
    } else if (key == "delta") {
      c.delta = io::parse_double(value, where);
    } else if (key == "shots_grid") {
      c.shots_grid = detail::parse_shots_grid(value, where);
    } else if (key == "gamma_grid") {
      c.gamma_grid = detail::parse_real_grid(value, where);
    } else if (key == "channel") {
      c.channel = parse_noise_model(value);
    } else if (key == "theta_x") {
      c.theta_x = detail::parse_angle(value, where);
    } else if (key == "theta_z") {
      c.theta_z = detail::parse_angle(value, where);
    } else if (key == "n_qubits") {
      c.n_qubits = static_cast<int>(io::parse_double(value, where));
    } else if (key == "include_eps2") {
      c.include_eps2 = detail::parse_bool(value, where);
    } else if (key == "effect-convention") {
      c.effect_convention = parse_effect_convention(value);
    } else if (key == "witness-sampling") {
      if (value == "single-povm") c.witness_sampling = WitnessSampling::single_povm;
      else if (value == "two-setting") c.witness_sampling = WitnessSampling::two_setting;
      else throw ValidationError(where + ": expected single-povm or two-setting");
    } else if (key == "tol") {
      c.solver.tol = io::parse_double(value, where);
    } else if (key == "max_iter") {
      c.solver.max_iter = static_cast<std::int64_t>(io::parse_double(value, where));
    } else {
      throw ValidationError(ctx + ": unknown key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

inline ExperimentConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

struct SummaryRow {
  std::string curve;
  double sweep = 0.0;
  double median = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  int n_feasible = 0;
  int n_infeasible = 0;
};

struct TrialRecord {
  std::string curve;
  double sweep = 0.0;
  int trial = 0;
  std::uint64_t shots = 0;
  double eps1 = 0.0;
  double dop_bound = 0.0; // bound on d_op(E, F) as computed by the distance module
  double eps2 = 0.0;      // radius actually used: 2 * dop_bound, or 0
  std::string eps2_source;
  CertifiedBound bound;
};

struct ExperimentResult {
  ExperimentKind experiment = ExperimentKind::fidelity;
  std::string sweep_name;
  bool log_sweep = false;
  std::vector<SummaryRow> rows;
  std::vector<TrialRecord> trials;

  const SummaryRow* find(const std::string& curve, double sweep) const {
    for (const auto& r : rows)
      if (r.curve == curve && r.sweep == sweep) return &r;
    return nullptr;
  }
};

// Linear-interpolation quantile of sorted data.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace detail {

// Runs `body(i)` for i in [0, n) on the available hardware threads. Results
// must be written by index so the outcome does not depend on scheduling.
inline void parallel_for(int n, const std::function<void(int)>& body) {
  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(std::max(n, 1))));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Epsilon2 {
  double dop_bound = 0.0;
  std::string source;
};

// Bound on d_op from the fidelity formula; when its hypotheses fail (e.g.
// non-unital noise in the Heisenberg picture changes tr F_k) the spectral-norm
// sum bound is used instead and the source is recorded.
inline Epsilon2 dop_bound_for(const Povm& target, const Povm& implemented) {
  try {
    return {d_op_fidelity_bound(target, implemented).value, "fidelity-bound"};
  } catch (const OutcomePreconditionError&) {
    return {d_op_norm_bound(target, implemented).value, "norm-bound"};
  }
}

inline void summarize(ExperimentResult& result, const std::vector<std::string>& curve_order,
                      const std::vector<double>& sweeps) {
  for (const auto& curve : curve_order) {
    for (double s : sweeps) {
      SummaryRow row;
      row.curve = curve;
      row.sweep = s;
      std::vector<double> values;
      for (const auto& t : result.trials) {
        if (t.curve != curve || t.sweep != s) continue;
        if (t.bound.status == SolveStatus::infeasible) {
          ++row.n_infeasible;
        } else {
          ++row.n_feasible;
          values.push_back(t.bound.dual_bound);
        }
      }
      if (row.n_feasible + row.n_infeasible == 0) continue;
      std::sort(values.begin(), values.end());
      row.median = quantile(values, 0.5);
      row.q1 = quantile(values, 0.25);
      row.q3 = quantile(values, 0.75);
      result.rows.push_back(row);
    }
  }
}

inline std::string shots_label(std::uint64_t n) {
  const int k = std::countr_zero(n);
  if ((std::uint64_t{1} << k) == n) return "2^" + std::to_string(k);
  return std::to_string(n);
}

inline std::string gamma_label(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

} // namespace detail

// Certified lower bound on <psi|rho|psi> for Haar-random two-qubit targets,
// measured with SIC (x) SIC through a local noise channel.
inline ExperimentResult run_fidelity(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::fidelity) throw ValidationError("run_fidelity: wrong experiment kind");
  validate_config(cfg);
  ExperimentResult result;
  result.experiment = cfg.experiment;
  result.sweep_name = "shots";
  result.log_sweep = true;

  const Povm sic = sic_povm_qubit();
  const Povm target = tensor_povm({sic, sic});
  struct Setting {
    Povm implemented;
    detail::Epsilon2 eps2;
  };
  std::vector<Setting> settings;
  std::vector<std::string> curves;
  for (double g : cfg.gamma_grid) {
    const KrausChannel ch = noise_channel(cfg.channel, g);
    Povm f = noisy_povm({ch, ch}, {sic, sic}, cfg.effect_convention);
    settings.push_back({f, detail::dop_bound_for(target, f)});
    curves.push_back(std::string(to_string(cfg.channel)) + " gamma=" + detail::gamma_label(g));
  }

  const RngStream root(cfg.seed);
  const std::size_t points = settings.size() * cfg.shots_grid.size();
  result.trials.resize(points * static_cast<std::size_t>(cfg.n_trials));
  detail::parallel_for(cfg.n_trials, [&](int trial) {
    const RngStream stream = root.split(static_cast<std::uint64_t>(trial));
    RngStream state_rng = stream.split(0);
    const PureState psi = haar_random_pure_state(4, state_rng);
    const DensityMatrix omega = DensityMatrix::from_pure(psi);
    const Observable objective(psi.projector());
    for (std::size_t gi = 0; gi < settings.size(); ++gi) {
      for (std::size_t ni = 0; ni < cfg.shots_grid.size(); ++ni) {
        const std::size_t point = gi * cfg.shots_grid.size() + ni;
        RngStream sample_rng = stream.split(1 + point);
        const auto rec = simulate_measurement(settings[gi].implemented, omega, cfg.shots_grid[ni], sample_rng);
        TrialRecord t;
        t.curve = curves[gi];
        t.sweep = static_cast<double>(cfg.shots_grid[ni]);
        t.trial = trial;
        t.shots = cfg.shots_grid[ni];
        t.dop_bound = settings[gi].eps2.dop_bound;
        t.eps2 = cfg.include_eps2 ? 2.0 * t.dop_bound : 0.0;
        t.eps2_source = cfg.include_eps2 ? settings[gi].eps2.source : "none";
        const ConfidenceRegion region = build_region(target, rec, t.eps2, cfg.delta);
        t.eps1 = region.eps1;
        t.bound = certify(region, objective, Direction::min, cfg.solver);
        result.trials[point * static_cast<std::size_t>(cfg.n_trials) + static_cast<std::size_t>(trial)] =
            std::move(t);
      }
    }
  });
  std::vector<double> sweeps;
  for (auto n : cfg.shots_grid) sweeps.push_back(static_cast<double>(n));
  detail::summarize(result, curves, sweeps);
  return result;
}

// Certified upper bound on the magnetization of |0...0> read out through a
// computational-basis measurement rotated by exp(-i gamma sigma^y) per qubit.
inline ExperimentResult run_magnetization(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::magnetization)
    throw ValidationError("run_magnetization: wrong experiment kind");
  validate_config(cfg);
  ExperimentResult result;
  result.experiment = cfg.experiment;
  result.sweep_name = "gamma";
  result.log_sweep = false;

  const int n = cfg.n_qubits;
  const Povm target = computational_povm(n);
  const Observable magnetization = magnetization_operator(n);
  const DensityMatrix omega = DensityMatrix::from_pure(PureState::basis(target.dim(), 0));
  const Povm z1 = computational_povm(1);

  struct Setting {
    Povm implemented;
    detail::Epsilon2 eps2;
  };
  std::vector<Setting> settings;
  for (double g : cfg.gamma_grid) {
    // The rotation channel's Kraus operator is exp(-i (angle/2) sigma^y).
    const KrausChannel ch = noise_channel(NoiseModel::rotation, 2.0 * g);
    Povm f = noisy_povm(std::vector<KrausChannel>(static_cast<std::size_t>(n), ch),
                        std::vector<Povm>(static_cast<std::size_t>(n), z1), cfg.effect_convention);
    settings.push_back({f, detail::dop_bound_for(target, f)});
  }

  std::vector<std::string> curves;
  for (auto shots : cfg.shots_grid) {
    curves.push_back("eps1+eps2 N=" + detail::shots_label(shots));
    curves.push_back("eps1 N=" + detail::shots_label(shots));
  }

  const RngStream root(cfg.seed);
  const std::size_t points = settings.size() * cfg.shots_grid.size();
  const auto trials = static_cast<std::size_t>(cfg.n_trials);
  result.trials.resize(points * 2 * trials);
  detail::parallel_for(cfg.n_trials, [&](int trial) {
    const RngStream stream = root.split(static_cast<std::uint64_t>(trial));
    for (std::size_t gi = 0; gi < settings.size(); ++gi) {
      for (std::size_t ni = 0; ni < cfg.shots_grid.size(); ++ni) {
        const std::size_t point = gi * cfg.shots_grid.size() + ni;
        RngStream sample_rng = stream.split(1 + point);
        const auto rec = simulate_measurement(settings[gi].implemented, omega, cfg.shots_grid[ni], sample_rng);
        for (int with_eps2 = 1; with_eps2 >= 0; --with_eps2) {
          TrialRecord t;
          t.curve = curves[2 * ni + (with_eps2 ? 0 : 1)];
          t.sweep = cfg.gamma_grid[gi];
          t.trial = trial;
          t.shots = cfg.shots_grid[ni];
          t.dop_bound = settings[gi].eps2.dop_bound;
          t.eps2 = with_eps2 ? 2.0 * t.dop_bound : 0.0;
          t.eps2_source = with_eps2 ? settings[gi].eps2.source : "none";
          const ConfidenceRegion region = build_region(target, rec, t.eps2, cfg.delta);
          t.eps1 = region.eps1;
          t.bound = certify(region, magnetization, Direction::max, cfg.solver);
          const std::size_t slot = (point * 2 + (with_eps2 ? 0 : 1)) * trials + static_cast<std::size_t>(trial);
          result.trials[slot] = std::move(t);
        }
      }
    }
  });
  detail::summarize(result, curves, cfg.gamma_grid);
  return result;
}

// Certified lower bound on tr(W rho), W = XX + ZZ, from tilted X/Z readouts.
inline ExperimentResult run_witness(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::witness) throw ValidationError("run_witness: wrong experiment kind");
  validate_config(cfg);
  ExperimentResult result;
  result.experiment = cfg.experiment;
  result.sweep_name = "shots";
  result.log_sweep = true;

  const Povm target = ideal_witness_povm();
  const Povm implemented = imperfect_witness_povm(cfg.theta_x, cfg.theta_z);
  const Povm setting_x = witness_setting_povm(cfg.theta_x, "xx");
  const Povm setting_z = witness_setting_povm(cfg.theta_z, "zz");
  const detail::Epsilon2 eps2 = detail::dop_bound_for(target, implemented);
  const Observable w = witness_operator();

  ComplexVector phi(2);
  phi << std::cos(std::numbers::pi / 8.0), std::sin(std::numbers::pi / 8.0);
  const PureState phi1(phi);
  const DensityMatrix separable = DensityMatrix::from_pure(tensor(phi1, phi1));
  const DensityMatrix bell = DensityMatrix::from_pure(bell_phi_plus());

  struct Curve {
    std::string name;
    const DensityMatrix* state;
    bool with_eps2;
  };
  const std::vector<Curve> curves = {{"phi-phi eps1+eps2", &separable, true},
                                     {"phi-phi eps1", &separable, false},
                                     {"phi+ eps1+eps2", &bell, true}};

  auto measure = [&](const DensityMatrix& state, std::uint64_t shots, RngStream& rng) {
    if (cfg.witness_sampling == WitnessSampling::single_povm)
      return simulate_measurement(implemented, state, shots, rng);
    // Two settings with shots/2 each, merged into the 8-outcome record.
    const std::uint64_t half = shots / 2;
    const auto rx = simulate_measurement(setting_x, state, half, rng);
    const auto rz = simulate_measurement(setting_z, state, shots - half, rng);
    MeasurementRecord rec;
    rec.povm_id = implemented.id();
    rec.shots = shots;
    rec.counts = rx.counts;
    rec.counts.insert(rec.counts.end(), rz.counts.begin(), rz.counts.end());
    return rec;
  };

  const RngStream root(cfg.seed);
  const std::size_t n_points = cfg.shots_grid.size();
  const auto trials = static_cast<std::size_t>(cfg.n_trials);
  result.trials.resize(curves.size() * n_points * trials);
  detail::parallel_for(cfg.n_trials, [&](int trial) {
    const RngStream stream = root.split(static_cast<std::uint64_t>(trial));
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
      for (std::size_t ni = 0; ni < n_points; ++ni) {
        // Curves sharing a state share the simulated data.
        const std::size_t state_index = curves[ci].state == &separable ? 0 : 1;
        RngStream sample_rng = stream.split(1 + state_index * n_points + ni);
        const std::uint64_t shots = cfg.shots_grid[ni];
        const auto rec = measure(*curves[ci].state, shots, sample_rng);
        TrialRecord t;
        t.curve = curves[ci].name;
        t.sweep = static_cast<double>(shots);
        t.trial = trial;
        t.shots = shots;
        t.dop_bound = eps2.dop_bound;
        t.eps2 = curves[ci].with_eps2 ? 2.0 * eps2.dop_bound : 0.0;
        t.eps2_source = curves[ci].with_eps2 ? eps2.source : "none";
        ConfidenceRegion region = build_region(target, rec, t.eps2, cfg.delta);
        if (cfg.witness_sampling == WitnessSampling::two_setting) {
          // Each half-weighted setting block deviates by at most
          // (1/2) * bhc(N/2, 4, delta/2); union bound over the two settings.
          region.eps1 = bhc_epsilon(std::max<std::uint64_t>(shots / 2, 1), 4, cfg.delta / 2.0);
        }
        t.eps1 = region.eps1;
        t.bound = certify(region, w, Direction::min, cfg.solver);
        result.trials[(ci * n_points + ni) * trials + static_cast<std::size_t>(trial)] = std::move(t);
      }
    }
  });
  std::vector<std::string> names;
  for (const auto& c : curves) names.push_back(c.name);
  std::vector<double> sweeps;
  for (auto n : cfg.shots_grid) sweeps.push_back(static_cast<double>(n));
  detail::summarize(result, names, sweeps);
  return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::fidelity: return run_fidelity(cfg);
    case ExperimentKind::magnetization: return run_magnetization(cfg);
    case ExperimentKind::witness: return run_witness(cfg);
  }
  throw ValidationError("unknown experiment");
}

// ---------------------------------------------------------------------------
// Output

inline std::string summary_csv(const ExperimentResult& r) {
  std::string out = "curve,sweep,median,q1,q3,n_feasible,n_infeasible\n";
  for (const auto& row : r.rows)
    out += row.curve + "," + io::format_double(row.sweep) + "," + io::format_double(row.median) + "," +
           io::format_double(row.q1) + "," + io::format_double(row.q3) + "," + std::to_string(row.n_feasible) +
           "," + std::to_string(row.n_infeasible) + "\n";
  return out;
}

inline std::string trials_csv(const ExperimentResult& r) {
  std::string out =
      "curve,sweep,trial,shots,eps1,dop_bound,eps2,eps2_source,status,dual_bound,primal_value,residual,iterations\n";
  for (const auto& t : r.trials)
    out += t.curve + "," + io::format_double(t.sweep) + "," + std::to_string(t.trial) + "," +
           std::to_string(t.shots) + "," + io::format_double(t.eps1) + "," + io::format_double(t.dop_bound) + "," +
           io::format_double(t.eps2) + "," + t.eps2_source + "," + std::string(to_string(t.bound.status)) + "," +
           io::format_double(t.bound.dual_bound) + "," + io::format_double(t.bound.primal_value) + "," +
           io::format_double(t.bound.primal_residual) + "," + std::to_string(t.bound.iterations) + "\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed for " + path.string());
}

inline void emit_csv(const ExperimentResult& r, const std::filesystem::path& path) {
  if (r.rows.empty()) throw ValidationError("emit_csv: empty result");
  write_text(path, summary_csv(r));
}

inline void emit_trials_csv(const ExperimentResult& r, const std::filesystem::path& path) {
  write_text(path, trials_csv(r));
}

inline std::string render_svg(const ExperimentResult& r) {
  if (r.rows.empty()) throw ValidationError("emit_svg: empty result");
  const double width = 720, height = 440, left = 70, right = 200, top = 30, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  std::vector<std::string> curves;
  for (const auto& row : r.rows)
    if (std::find(curves.begin(), curves.end(), row.curve) == curves.end()) curves.push_back(row.curve);

  auto xval = [&](double s) { return r.log_sweep ? std::log2(s) : s; };
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& row : r.rows) {
    xmin = std::min(xmin, xval(row.sweep));
    xmax = std::max(xmax, xval(row.sweep));
    for (double v : {row.median, row.q1, row.q3})
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  }
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double s) { return left + (xval(s) - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double v) { return top + (ymax - v) / (ymax - ymin) * plot_h; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n";
  svg << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << num(v)
        << "</text>\n";
  }
  std::vector<double> sweeps;
  for (const auto& row : r.rows)
    if (std::find(sweeps.begin(), sweeps.end(), row.sweep) == sweeps.end()) sweeps.push_back(row.sweep);
  for (double s : sweeps) {
    const std::string label = r.log_sweep ? detail::shots_label(static_cast<std::uint64_t>(s)) : num(s);
    svg << "<text x=\"" << num(px(s)) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">" << label
        << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
      << r.sweep_name << "</text>\n";
  svg << "</g>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = palette[c % (sizeof palette / sizeof palette[0])];
    std::vector<const SummaryRow*> pts;
    for (const auto& row : r.rows)
      if (row.curve == curves[c] && std::isfinite(row.median)) pts.push_back(&row);
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->sweep < b->sweep; });
    if (!pts.empty()) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (auto* p : pts) svg << num(px(p->sweep)) << "," << num(py(p->q3)) << " ";
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) svg << num(px((*it)->sweep)) << "," << num(py((*it)->q1)) << " ";
      svg << "\"/>\n";
    }
    svg << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" d=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      svg << (i == 0 ? "M" : " L") << num(px(pts[i]->sweep)) << "," << num(py(pts[i]->median));
    svg << "\"/>\n";
    svg << "<text x=\"" << left + plot_w + 12 << "\" y=\"" << top + 16 * (c + 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << curves[c] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_svg(const ExperimentResult& r, const std::filesystem::path& path) { write_text(path, render_svg(r)); }

} // namespace qcert
