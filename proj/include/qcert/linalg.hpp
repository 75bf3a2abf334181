#pragma once

// Dense complex-matrix primitives: Hermitian eigensolver (cyclic Jacobi),
// norms, Kronecker products and the Euclidean projections used by the
// certification solver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace qcert {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;

struct Spectrum {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors; // columns, unitary
};

inline bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex z = a.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
  return m;
}

// Largest |A_ij - conj(A_ji)|.
inline double hermitian_defect(const ComplexMatrix& a) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
  return worst;
}

inline bool is_hermitian(const ComplexMatrix& a, double rel_tol = kHermitianTol) {
  if (a.rows() != a.cols() || !all_finite(a)) return false;
  return hermitian_defect(a) <= rel_tol * max_abs(a);
}

inline void require_hermitian(const ComplexMatrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw ValidationError(std::string(who) + ": matrix is not square");
  if (!all_finite(a)) throw ValidationError(std::string(who) + ": non-finite entry");
  if (hermitian_defect(a) > kHermitianTol * max_abs(a))
    throw ValidationError(std::string(who) + ": matrix is not Hermitian");
}

namespace detail {

// Plain complex product; std::complex operator* carries the Annex G NaN
// recovery path, which dominates the Jacobi inner loop.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Cyclic Jacobi on a Hermitian matrix `a` (overwritten), accumulating the
// rotations into `v`. Converged when the off-diagonal Frobenius mass drops to
// 1e-12 * ||A||_F.
inline void jacobi_sweeps(ComplexMatrix& a, ComplexMatrix& v, int max_sweeps = 100) {
  const Eigen::Index n = a.rows();
  const double scale = a.norm();
  const double target = 1e-12 * scale;
  // Rotations on elements this small cannot move the off-diagonal mass above target.
  const double skip = target / static_cast<double>(std::max<Eigen::Index>(n, 1) * 4);
  for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) {
      // Clear roundoff on the diagonal imaginary parts.
      for (Eigen::Index i = 0; i < n; ++i) a(i, i) = a(i, i).real();
      return;
    }
    if (sweep == max_sweeps) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double g = std::abs(apq);
        if (g <= skip) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Phase w makes the (p,q) element real positive; then a real rotation.
        const Complex w = std::conj(apq) / g;
        const double theta = (aqq - app) / (2.0 * g);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U on columns (p,q): col_p' = c col_p - s w col_q, col_q' = s col_p + c w col_q.
        const Complex sw = s * w;
        const Complex cw = c * w;
        Complex* colp = a.data() + p * n;
        Complex* colq = a.data() + q * n;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex x = colp[k];
          const Complex y = colq[k];
          colp[k] = c * x - mul(sw, y);
          colq[k] = s * x + mul(cw, y);
        }
        // Rows follow from Hermiticity of U^dag A U; only the 2x2 block differs.
        for (Eigen::Index k = 0; k < n; ++k) {
          a(p, k) = std::conj(colp[k]);
          a(q, k) = std::conj(colq[k]);
        }
        a(p, p) = app - t * g;
        a(q, q) = aqq + t * g;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        Complex* vp = v.data() + p * n;
        Complex* vq = v.data() + q * n;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex x = vp[k];
          const Complex y = vq[k];
          vp[k] = c * x - mul(sw, y);
          vq[k] = s * x + mul(cw, y);
        }
      }
    }
  }
  throw NumericError("hermitian_eig: Jacobi iteration did not converge in 100 sweeps");
}

inline Spectrum sorted_spectrum(const ComplexMatrix& diag, const ComplexMatrix& v) {
  const Eigen::Index n = diag.rows();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return diag(i, i).real() < diag(j, j).real();
  });
  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = diag(order[k], order[k]).real();
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

} // namespace detail

inline Spectrum hermitian_eig(const ComplexMatrix& a) {
  require_hermitian(a, "hermitian_eig");
  ComplexMatrix work = 0.5 * (a + a.adjoint());
  ComplexMatrix v = ComplexMatrix::Identity(a.rows(), a.cols());
  detail::jacobi_sweeps(work, v);
  return detail::sorted_spectrum(work, v);
}

// Same result as hermitian_eig, but starts the Jacobi sweeps in the basis
// `guess` (a unitary whose columns approximately diagonalize `a`). Repeated
// decompositions of slowly varying matrices then need one or two sweeps.
inline Spectrum hermitian_eig_from(const ComplexMatrix& a, const ComplexMatrix& guess) {
  require_hermitian(a, "hermitian_eig");
  if (guess.rows() != a.rows() || guess.cols() != a.cols())
    throw ValidationError("hermitian_eig: basis shape mismatch");
  ComplexMatrix work = guess.adjoint() * (0.5 * (a + a.adjoint())) * guess;
  work = 0.5 * (work + work.adjoint()).eval();
  ComplexMatrix v = guess;
  detail::jacobi_sweeps(work, v);
  return detail::sorted_spectrum(work, v);
}

inline double spectral_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  const Spectrum s = hermitian_eig(a);
  return std::max(std::abs(s.eigenvalues(0)), std::abs(s.eigenvalues(s.eigenvalues.size() - 1)));
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Euclidean projection onto {x >= 0, sum x = radius} by sort-and-threshold.
inline RealVector project_simplex(const RealVector& v, double radius = 1.0) {
  if (!(radius > 0.0)) throw ValidationError("project_simplex: radius must be positive");
  const Eigen::Index n = v.size();
  if (n == 0) throw ValidationError("project_simplex: empty vector");
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return v(i) > v(j); });
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += v(order[k]);
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (v(order[k]) - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).max(0.0).matrix();
}

// Euclidean projection onto {x : sum |x_i| <= radius}.
inline RealVector project_l1_ball(const RealVector& v, double radius) {
  if (!(radius >= 0.0)) throw ValidationError("project_l1_ball: radius must be non-negative");
  if (v.cwiseAbs().sum() <= radius) return v;
  if (radius == 0.0) return RealVector::Zero(v.size());
  const RealVector magnitude = project_simplex(v.cwiseAbs(), radius);
  RealVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out(i) = v(i) < 0.0 ? -magnitude(i) : magnitude(i);
  return out;
}

inline ComplexMatrix reconstruct(const Spectrum& s) {
  return s.eigenvectors * s.eigenvalues.cast<Complex>().asDiagonal() *
         s.eigenvectors.adjoint();
}

// Frobenius-nearest unit-trace PSD matrix. When `basis` is non-null it seeds
// the eigensolver and is updated with the new eigenvectors.
inline ComplexMatrix project_density_matrix(const ComplexMatrix& a, ComplexMatrix* basis = nullptr) {
  Spectrum s = (basis != nullptr && basis->rows() == a.rows())
                   ? hermitian_eig_from(a, *basis)
                   : hermitian_eig(a);
  if (basis != nullptr) *basis = s.eigenvectors;
  s.eigenvalues = project_simplex(s.eigenvalues, 1.0);
  ComplexMatrix out = reconstruct(s);
  return 0.5 * (out + out.adjoint());
}

inline double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  // tr(AB) for Hermitian A, B; equals the real Frobenius inner product.
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

} // namespace qcert
