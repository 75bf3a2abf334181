#pragma once

// Certified bounds on tr(C rho) over the confidence region
//
//   { rho >= 0, tr rho = 1, sum_k |tr(E_k rho) - f_k| <= eps1 + eps2 }.
//
// The program is solved by ADMM on the splitting
//
//   min tr(C X)  s.t.  X = Z,  A(X) - t = f,  Z in {density matrices},  t in l1-ball(eps)
//
// with A(X)_k = tr(E_k X). The headline number is not the ADMM objective but a
// dual certificate evaluated at the running multipliers, which is a valid
// one-sided bound whatever the state of convergence.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "quantum.hpp"
#include "statistics.hpp"

namespace qcert {

struct ConfidenceRegion {
  Povm target;
  RealVector frequencies;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double delta = 1.0;

  double radius() const { return eps1 + eps2; }
};

inline void validate_region(const ConfidenceRegion& r) {
  if (static_cast<std::size_t>(r.frequencies.size()) != r.target.size())
    throw ValidationError("ConfidenceRegion: frequency vector length differs from the outcome count");
  if (!(r.eps1 >= 0.0) || !(r.eps2 >= 0.0))
    throw ValidationError("ConfidenceRegion: radii must be non-negative");
  if (!(r.delta > 0.0 && r.delta <= 1.0)) throw ValidationError("ConfidenceRegion: delta must lie in (0, 1]");
}

inline ConfidenceRegion build_region(const Povm& target, const MeasurementRecord& record, double eps2,
                                     double delta) {
  if (record.counts.size() != target.size())
    throw ValidationError("build_region: record has " + std::to_string(record.counts.size()) +
                          " outcomes but the target POVM has " + std::to_string(target.size()));
  if (!(eps2 >= 0.0)) throw ValidationError("build_region: eps2 must be non-negative");
  ConfidenceRegion r{target, frequencies(record), bhc_epsilon(record.shots, target.size(), delta), eps2,
                     delta};
  return r;
}

enum class Direction { min, max };
enum class SolveStatus { converged, infeasible, iteration_limit };

inline std::string_view to_string(Direction d) { return d == Direction::min ? "min" : "max"; }
inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration-limit";
  }
  return "unknown";
}

struct SolverSettings {
  double tol = 1e-7;
  double feas_tol = 1e-6;
  std::int64_t max_iter = 50000;
  int objective_window = 50;
  double penalty = 1.0;
  int rebalance_every = 100;
  int stall_window = 500;
  double stall_rel_change = 1e-9;
  int certificate_every = 10;
  double relaxation = 1.6;
};

struct CertifiedBound {
  Direction direction = Direction::min;
  double primal_value = std::numeric_limits<double>::quiet_NaN();
  double dual_bound = std::numeric_limits<double>::quiet_NaN();
  ComplexMatrix iterate;
  double primal_residual = 0.0;
  double constraint_slack = 0.0;
  double infeasibility_gap = 0.0;
  std::int64_t iterations = 0;
  SolveStatus status = SolveStatus::iteration_limit;

  // The rigorous side: lower bound for min, upper bound for max.
  double certified() const { return dual_bound; }
};

namespace detail {

inline RealVector apply_measurement(const std::vector<ComplexMatrix>& effects, const ComplexMatrix& x) {
  RealVector out(static_cast<Eigen::Index>(effects.size()));
  for (std::size_t k = 0; k < effects.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = real_trace_product(effects[k], x);
  return out;
}

inline ComplexMatrix apply_adjoint(const std::vector<ComplexMatrix>& effects, const RealVector& y) {
  ComplexMatrix out = ComplexMatrix::Zero(effects.front().rows(), effects.front().cols());
  for (std::size_t k = 0; k < effects.size(); ++k) out += y(static_cast<Eigen::Index>(k)) * effects[k];
  return out;
}

inline double lambda_min(const ComplexMatrix& a) {
  return hermitian_eig(0.5 * (a + a.adjoint())).eigenvalues(0);
}

} // namespace detail

// lambda_min(C - sum_k y_k E_k) + sum_k y_k f_k - eps * max_k |y_k|: a lower
// bound on min tr(C rho) over the region for every y.
inline double dual_certificate(const ConfidenceRegion& region, const Observable& objective,
                               const RealVector& y) {
  if (static_cast<std::size_t>(y.size()) != region.target.size())
    throw ValidationError("dual_certificate: multiplier length differs from the outcome count");
  if (objective.dim() != region.target.dim())
    throw ValidationError("dual_certificate: objective dimension differs from the POVM dimension");
  const ComplexMatrix shifted = objective.matrix() - detail::apply_adjoint(region.target.effects(), y);
  return detail::lambda_min(shifted) + y.dot(region.frequencies) -
         region.radius() * (y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0);
}

namespace detail {

// Minimization core; `c` is already sign-adjusted for the direction.
inline CertifiedBound solve_min(const ConfidenceRegion& region, const ComplexMatrix& c,
                                const SolverSettings& settings) {
  const auto& effects = region.target.effects();
  const Eigen::Index d = region.target.dim();
  const auto m = static_cast<Eigen::Index>(effects.size());
  const RealVector& f = region.frequencies;
  const double eps = region.radius();
  const Observable objective(c);

  // (I + A A*)^{-1} through the Gram matrix of the effects.
  Eigen::MatrixXd gram(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = j; k < m; ++k)
      gram(j, k) = gram(k, j) = real_trace_product(effects[static_cast<std::size_t>(j)],
                                                   effects[static_cast<std::size_t>(k)]);
  const Eigen::LLT<Eigen::MatrixXd> inner(Eigen::MatrixXd::Identity(m, m) + gram);

  double penalty = settings.penalty;
  ComplexMatrix z = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  ComplexMatrix x = z;
  ComplexMatrix basis = ComplexMatrix::Identity(d, d);
  RealVector t = project_l1_ball(apply_measurement(effects, z) - f, eps);
  RealVector w = RealVector::Zero(m);

  CertifiedBound out;
  out.direction = Direction::min;
  double best_certificate = -std::numeric_limits<double>::infinity();
  auto offer_certificate = [&](const RealVector& y) {
    const double v = dual_certificate(region, objective, y);
    if (std::isfinite(v) && v > best_certificate) best_certificate = v;
    // Constant shifts cancel in the first two terms for complete POVMs and
    // centering minimizes the last one.
    const double mid = 0.5 * (y.maxCoeff() + y.minCoeff());
    const RealVector centered = (y.array() - mid).matrix();
    const double vc = dual_certificate(region, objective, centered);
    if (std::isfinite(vc) && vc > best_certificate) best_certificate = vc;
  };
  offer_certificate(RealVector::Zero(m));

  auto farkas = [&](const RealVector& y) {
    // Positive value for some y proves the region empty (homogeneous in y).
    const double scale = y.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return -1.0;
    const RealVector yn = y / scale;
    const double v = lambda_min(-apply_adjoint(effects, yn)) + yn.dot(f) - eps;
    return v;
  };

  std::deque<double> objectives;
  std::deque<double> residual_history;
  double primal_residual = 0.0;
  std::int64_t it = 0;
  for (; it < settings.max_iter; ++it) {
    const ComplexMatrix b = z - u + apply_adjoint(effects, t + f - w) - c / penalty;
    const RealVector coeff = inner.solve(apply_measurement(effects, b));
    x = b - apply_adjoint(effects, coeff);

    // Over-relaxed ADMM: the projections see a blend of the new X and the old
    // constraint-side variables.
    const double alpha = settings.relaxation;
    const ComplexMatrix z_prev = z;
    const RealVector t_prev = t;
    const RealVector ax = apply_measurement(effects, x);
    const ComplexMatrix x_hat = alpha * x + (1.0 - alpha) * z_prev;
    const RealVector ax_hat = alpha * ax + (1.0 - alpha) * (t_prev + f);
    z = project_density_matrix(x_hat + u, &basis);
    t = project_l1_ball(ax_hat - f + w, eps);
    u += x_hat - z;
    w += ax_hat - t - f;

    const ComplexMatrix r_consensus = x - z;
    const RealVector r_coupling = ax - t - f;

    const double admm_primal = std::sqrt(r_consensus.squaredNorm() + r_coupling.squaredNorm());
    const double admm_dual =
        penalty * ((z - z_prev) + apply_adjoint(effects, t - t_prev)).norm();
    const RealVector az = apply_measurement(effects, z);
    const double violation = std::max(0.0, (az - f).cwiseAbs().sum() - eps);
    primal_residual = std::max(r_consensus.norm(), violation);

    const double obj = real_trace_product(c, z);
    objectives.push_back(obj);
    if (static_cast<int>(objectives.size()) > settings.objective_window + 1) objectives.pop_front();
    residual_history.push_back(admm_primal);
    if (static_cast<int>(residual_history.size()) > settings.stall_window + 1) residual_history.pop_front();

    const RealVector y = -penalty * w;
    if ((it + 1) % settings.certificate_every == 0) offer_certificate(y);

    if ((it + 1) % settings.rebalance_every == 0) {
      if ((it + 1) % (2 * settings.rebalance_every) == 0 && farkas(y) > 1e-9) {
        out.status = SolveStatus::infeasible;
        break;
      }
      if (admm_primal > 10.0 * admm_dual) {
        penalty *= 2.0;
        u /= 2.0;
        w /= 2.0;
      } else if (admm_dual > 10.0 * admm_primal) {
        penalty /= 2.0;
        u *= 2.0;
        w *= 2.0;
      }
    }

    if (static_cast<int>(residual_history.size()) == settings.stall_window + 1 &&
        residual_history.back() > settings.feas_tol) {
      const double old = residual_history.front();
      const double rel = std::abs(residual_history.back() - old) / residual_history.back();
      if (rel < settings.stall_rel_change) {
        out.status = SolveStatus::infeasible;
        break;
      }
    }

    if (static_cast<int>(objectives.size()) == settings.objective_window + 1 &&
        primal_residual <= settings.tol && admm_dual <= settings.tol * std::max(1.0, c.norm()) &&
        std::abs(objectives.back() - objectives.front()) <= settings.tol * std::max(1.0, std::abs(obj))) {
      out.status = SolveStatus::converged;
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.iterate = z;
  out.primal_residual = primal_residual;
  const RealVector az = apply_measurement(effects, z);
  out.constraint_slack = eps - (az - f).cwiseAbs().sum();
  if (out.status == SolveStatus::infeasible) {
    out.infeasibility_gap = std::sqrt((x - z).squaredNorm() + (apply_measurement(effects, x) - t - f).squaredNorm());
    out.primal_value = std::numeric_limits<double>::quiet_NaN();
    out.dual_bound = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  offer_certificate(-penalty * w);
  out.primal_value = real_trace_product(c, z);
  out.dual_bound = best_certificate;
  return out;
}

} // namespace detail

inline CertifiedBound certify(const ConfidenceRegion& region, const Observable& objective, Direction direction,
                              const SolverSettings& settings = {}) {
  validate_region(region);
  if (objective.dim() != region.target.dim())
    throw ValidationError("certify: objective dimension differs from the POVM dimension");
  if (direction == Direction::min) return detail::solve_min(region, objective.matrix(), settings);
  CertifiedBound b = detail::solve_min(region, -objective.matrix(), settings);
  b.direction = Direction::max;
  b.primal_value = -b.primal_value;
  b.dual_bound = -b.dual_bound;
  return b;
}

struct Feasibility {
  bool feasible = false;
  double gap = 0.0;
};

inline Feasibility feasibility_check(const ConfidenceRegion& region, const SolverSettings& settings = {}) {
  validate_region(region);
  const Eigen::Index d = region.target.dim();
  const auto b = detail::solve_min(region, ComplexMatrix::Zero(d, d), settings);
  if (b.status == SolveStatus::infeasible) return {false, b.infeasibility_gap};
  if (b.primal_residual <= settings.feas_tol) return {true, b.primal_residual};
  return {false, b.primal_residual};
}

} // namespace qcert
