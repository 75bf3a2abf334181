#pragma once

// Operational distance between two POVMs: exact power-set evaluation and the
// upper bounds that avoid it (local tensor, spectral-norm sum, Frobenius /
// 2-design, fidelity for rank-one targets).

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "quantum.hpp"
#include "statistics.hpp"

namespace qcert {

enum class DistanceKind {
  exact,
  local_bound,
  norm_bound,
  frobenius_bound,
  fidelity_bound,
  two_design_estimate
};

inline std::string_view to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::exact: return "exact";
    case DistanceKind::local_bound: return "local-bound";
    case DistanceKind::norm_bound: return "norm-bound";
    case DistanceKind::frobenius_bound: return "frobenius-bound";
    case DistanceKind::fidelity_bound: return "fidelity-bound";
    case DistanceKind::two_design_estimate: return "two-design-estimate";
  }
  return "unknown";
}

struct DistanceReport {
  double value = 0.0;
  DistanceKind kind = DistanceKind::exact;
  // exact: membership (0/1) of the maximizing subset; local-bound: per-factor
  // distances; other kinds: the per-outcome summands.
  std::vector<double> detail;
  double std_error = 0.0; // sampled 2-design estimate only
};

inline constexpr std::size_t kPowerSetCutoff = 20;

namespace detail {

inline void require_same_shape(const Povm& e, const Povm& f, const char* who) {
  if (e.size() != f.size())
    throw ValidationError(std::string(who) + ": POVMs have different outcome counts");
  if (e.dim() != f.dim()) throw ValidationError(std::string(who) + ": POVMs act on different dimensions");
}

inline std::vector<ComplexMatrix> differences(const Povm& e, const Povm& f) {
  std::vector<ComplexMatrix> out;
  out.reserve(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) out.push_back(e[k] - f[k]);
  return out;
}

} // namespace detail

// max over subsets x of || sum_{k in x} (E_k - F_k) ||. When both effect sets
// sum to the same operator, the sum over a complement is the negated sum, so
// only subsets containing outcome 0 are visited.
inline DistanceReport d_op_exact(const Povm& e, const Povm& f,
                                 std::size_t max_outcomes = kPowerSetCutoff) {
  detail::require_same_shape(e, f, "d_op_exact");
  const std::size_t m = e.size();
  if (m > max_outcomes)
    throw CutoffError("d_op_exact: " + std::to_string(m) + " outcomes exceed the power-set cutoff of " +
                      std::to_string(max_outcomes) + "; use d_op_local_bound or d_op_norm_bound");
  const auto diff = detail::differences(e, f);
  ComplexMatrix total = ComplexMatrix::Zero(e.dim(), e.dim());
  for (const auto& d : diff) total += d;
  const bool half = total.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + e.total().cwiseAbs().maxCoeff()) ||
                    total.cwiseAbs().maxCoeff() <= 1e-13;

  // Free bits enumerate outcomes `first..m-1`; outcome 0 is pinned in the half case.
  const std::size_t first = half ? 1 : 0;
  const std::size_t free_bits = m - first;
  const std::uint64_t n_subsets = std::uint64_t{1} << free_bits;

  auto subset_sum = [&](std::uint64_t gray) {
    ComplexMatrix s = half ? diff[0] : ComplexMatrix::Zero(e.dim(), e.dim());
    for (std::size_t b = 0; b < free_bits; ++b)
      if ((gray >> b) & 1U) s += diff[first + b];
    return s;
  };

  double best = 0.0;
  std::uint64_t best_gray = 0;
  ComplexMatrix running = subset_sum(0);
  if (half) {
    best = spectral_norm(running);
  }
  for (std::uint64_t i = 1; i < n_subsets; ++i) {
    const std::uint64_t gray = i ^ (i >> 1);
    if ((i & 1023U) == 0) {
      running = subset_sum(gray); // resynchronize against accumulated roundoff
    } else {
      const auto bit = static_cast<std::size_t>(std::countr_zero(i));
      if ((gray >> bit) & 1U)
        running += diff[first + bit];
      else
        running -= diff[first + bit];
    }
    const double v = spectral_norm(0.5 * (running + running.adjoint()));
    if (v > best) {
      best = v;
      best_gray = gray;
    }
  }

  DistanceReport r;
  r.kind = DistanceKind::exact;
  r.value = best;
  r.detail.assign(m, 0.0);
  if (half) r.detail[0] = 1.0;
  for (std::size_t b = 0; b < free_bits; ++b)
    if ((best_gray >> b) & 1U) r.detail[first + b] = 1.0;
  return r;
}

// sum_i d_op(E_i, F_i) over the tensor factors; bounds d_op of the products.
inline DistanceReport d_op_local_bound(const std::vector<std::pair<Povm, Povm>>& pairs) {
  if (pairs.empty()) throw ValidationError("d_op_local_bound: no factors");
  DistanceReport r;
  r.kind = DistanceKind::local_bound;
  for (const auto& [e, f] : pairs) {
    const double v = d_op_exact(e, f).value;
    r.detail.push_back(v);
    r.value += v;
  }
  return r;
}

// (1/2) sum_k ||E_k - F_k||.
inline DistanceReport d_op_norm_bound(const Povm& e, const Povm& f) {
  detail::require_same_shape(e, f, "d_op_norm_bound");
  DistanceReport r;
  r.kind = DistanceKind::norm_bound;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double v = 0.5 * spectral_norm(e[k] - f[k]);
    r.detail.push_back(v);
    r.value += v;
  }
  return r;
}

// (1/2) sum_k sqrt(||E_k - F_k||_F^2 + tr(E_k - F_k)^2).
inline DistanceReport d_op_frobenius_bound(const Povm& e, const Povm& f) {
  detail::require_same_shape(e, f, "d_op_frobenius_bound");
  DistanceReport r;
  r.kind = DistanceKind::frobenius_bound;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const ComplexMatrix d = e[k] - f[k];
    const double tr = d.trace().real();
    const double v = 0.5 * std::sqrt(d.squaredNorm() + tr * tr);
    r.detail.push_back(v);
    r.value += v;
  }
  return r;
}

inline constexpr double kRankOneTol = 1e-8;
inline constexpr double kTraceMatchTol = 1e-6;

// (1/2) sum_k sqrt(a_k^2 - a_k <alpha_k|F_k|alpha_k>) for E_k = a_k |alpha_k><alpha_k|
// and tr(F_k) = a_k. Both hypotheses are checked per outcome.
inline DistanceReport d_op_fidelity_bound(const Povm& e, const Povm& f) {
  detail::require_same_shape(e, f, "d_op_fidelity_bound");
  DistanceReport r;
  r.kind = DistanceKind::fidelity_bound;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const Spectrum s = hermitian_eig(e[k]);
    const Eigen::Index d = s.eigenvalues.size();
    const double a = e[k].trace().real();
    const double second = d > 1 ? s.eigenvalues(d - 2) : 0.0;
    if (second > kRankOneTol * a)
      throw OutcomePreconditionError("d_op_fidelity_bound: target effect " + std::to_string(k) +
                                         " is not rank one",
                                     k);
    const double trace_f = f[k].trace().real();
    if (std::abs(trace_f - a) > kTraceMatchTol)
      throw OutcomePreconditionError("d_op_fidelity_bound: tr(F_" + std::to_string(k) +
                                         ") differs from tr(E_" + std::to_string(k) + ")",
                                     k);
    const ComplexVector alpha = s.eigenvectors.col(d - 1);
    // a^2 - a <alpha|F|alpha> = a <alpha|E - F|alpha>; the difference form is exact when F == E.
    const double gap = (alpha.adjoint() * (e[k] - f[k]) * alpha)(0, 0).real();
    const double v = 0.5 * std::sqrt(std::max(0.0, a * gap));
    r.detail.push_back(v);
    r.value += v;
  }
  return r;
}

// ---------------------------------------------------------------------------
// 2-designs

// Checks that the uniform average of (|psi><psi|)^{(x)2} equals
// 2 P_sym / (d(d+1)) entrywise within `tol`.
inline bool is_two_design(const std::vector<PureState>& design, double tol = 1e-9) {
  if (design.empty()) return false;
  const Eigen::Index d = design.front().dim();
  ComplexMatrix frame = ComplexMatrix::Zero(d * d, d * d);
  for (const auto& psi : design) {
    if (psi.dim() != d) return false;
    ComplexVector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i) v.segment(i * d, d) = psi.amplitudes()(i) * psi.amplitudes();
    frame += v * v.adjoint();
  }
  frame /= static_cast<double>(design.size());
  ComplexMatrix sym = ComplexMatrix::Identity(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) sym(i * d + j, j * d + i) += 1.0;
  sym *= 1.0 / static_cast<double>(d * (d + 1));
  return (frame - sym).cwiseAbs().maxCoeff() <= tol;
}

// Eigenstates of sigma^x, sigma^y, sigma^z.
inline std::vector<PureState> pauli_design_qubit() {
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  std::vector<PureState> out;
  auto add = [&](Complex a, Complex b) {
    ComplexVector v(2);
    v << a, b;
    out.emplace_back(v);
  };
  add(1, 0);
  add(0, 1);
  add(h, h);
  add(h, -h);
  add(h, h * i);
  add(h, -h * i);
  return out;
}

// Orbit of |0...0> under the n-qubit Clifford group (the stabilizer states),
// generated by H, S and CNOT. A 2-design for every n.
inline std::vector<PureState> stabilizer_design(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 4) throw ValidationError("stabilizer_design: supports 1 to 4 qubits");
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  std::vector<ComplexMatrix> gates;
  const double h = 1.0 / std::sqrt(2.0);
  ComplexMatrix hadamard(2, 2);
  hadamard << h, h, h, -h;
  ComplexMatrix phase(2, 2);
  phase << 1, 0, 0, Complex(0, 1);
  auto embed = [&](const ComplexMatrix& g, int q) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int k = 0; k < n_qubits; ++k) out = kron(out, k == q ? g : pauli::I());
    return out;
  };
  for (int q = 0; q < n_qubits; ++q) {
    gates.push_back(embed(hadamard, q));
    gates.push_back(embed(phase, q));
  }
  for (int c = 0; c < n_qubits; ++c)
    for (int t = 0; t < n_qubits; ++t) {
      if (c == t) continue;
      ComplexMatrix g = ComplexMatrix::Zero(d, d);
      for (Eigen::Index k = 0; k < d; ++k) {
        const int cb = n_qubits - 1 - c;
        const int tb = n_qubits - 1 - t;
        const Eigen::Index target = ((k >> cb) & 1) ? (k ^ (Eigen::Index{1} << tb)) : k;
        g(target, k) = 1.0;
      }
      gates.push_back(g);
    }

  auto canonical = [&](ComplexVector v) {
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::abs(v(i)) > 1e-9) {
        v *= std::conj(v(i)) / std::abs(v(i));
        break;
      }
    return v;
  };
  auto key = [&](const ComplexVector& v) {
    std::vector<long long> k;
    for (Eigen::Index i = 0; i < d; ++i) {
      k.push_back(std::llround(v(i).real() * 1e8));
      k.push_back(std::llround(v(i).imag() * 1e8));
    }
    return k;
  };

  std::map<std::vector<long long>, std::size_t> seen;
  std::vector<ComplexVector> states;
  ComplexVector start = ComplexVector::Zero(d);
  start(0) = 1.0;
  states.push_back(start);
  seen[key(start)] = 0;
  for (std::size_t head = 0; head < states.size(); ++head) {
    for (const auto& g : gates) {
      ComplexVector next = canonical(g * states[head]);
      auto k = key(next);
      if (seen.emplace(std::move(k), states.size()).second) states.push_back(next);
    }
  }
  std::vector<PureState> out;
  out.reserve(states.size());
  for (const auto& v : states) out.push_back(PureState::normalized(v));
  return out;
}

struct ExactAverage {};
struct SampledAverage {
  std::uint64_t shots;
  RngStream rng;
};
using TwoDesignMode = std::variant<ExactAverage, SampledAverage>;

// (sqrt(d(d+1))/2) sum_k sqrt(mean_psi <psi|E_k - F_k|psi>^2). In sampled mode
// <psi|F_k|psi> is replaced by measured frequencies; <psi|E_k|psi> stays exact.
inline DistanceReport d_op_two_design_estimate(const Povm& e, const Povm& f,
                                               const std::vector<PureState>& design,
                                               TwoDesignMode mode = ExactAverage{}) {
  detail::require_same_shape(e, f, "d_op_two_design_estimate");
  if (design.empty() || design.front().dim() != e.dim() || !is_two_design(design))
    throw ValidationError("d_op_two_design_estimate: states do not form a 2-design of the POVM dimension");
  const std::size_t m = e.size();
  const std::size_t n = design.size();
  const double d = static_cast<double>(e.dim());

  // delta(i, k) = <psi_i|E_k|psi_i> - estimate of <psi_i|F_k|psi_i>
  Eigen::MatrixXd delta(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  Eigen::MatrixXd observed(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  std::uint64_t shots = 0;
  if (auto* sampled = std::get_if<SampledAverage>(&mode)) {
    if (sampled->shots == 0) throw ValidationError("d_op_two_design_estimate: zero shots");
    shots = sampled->shots;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    RealVector q(static_cast<Eigen::Index>(m));
    if (shots > 0) {
      auto& sampled = std::get<SampledAverage>(mode);
      RngStream stream = sampled.rng.split(i);
      const auto rec = simulate_measurement(f, DensityMatrix::from_pure(design[i]), shots, stream);
      q = frequencies(rec);
    } else {
      for (std::size_t k = 0; k < m; ++k) q(static_cast<Eigen::Index>(k)) = design[i].expectation(f[k]);
    }
    for (std::size_t k = 0; k < m; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      observed(ii, kk) = q(kk);
      delta(ii, kk) = design[i].expectation(e[k]) - q(kk);
    }
  }

  DistanceReport r;
  r.kind = DistanceKind::two_design_estimate;
  const double prefactor = std::sqrt(d * (d + 1.0)) / 2.0;
  RealVector root(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    root(kk) = std::sqrt(delta.col(kk).squaredNorm() / static_cast<double>(n));
    r.detail.push_back(prefactor * root(kk));
    r.value += prefactor * root(kk);
  }

  if (shots > 0) {
    // Delta method with the multinomial covariance of each design state's frequencies.
    double variance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      RealVector g(static_cast<Eigen::Index>(m));
      for (std::size_t k = 0; k < m; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        g(kk) = root(kk) > 0.0 ? -prefactor * delta(ii, kk) / (static_cast<double>(n) * root(kk)) : 0.0;
      }
      const RealVector q = observed.row(ii).transpose();
      const double gq = g.dot(q);
      variance += (g.cwiseProduct(g).dot(q) - gq * gq) / static_cast<double>(shots);
    }
    r.std_error = std::sqrt(std::max(0.0, variance));
  }
  return r;
}

} // namespace qcert
