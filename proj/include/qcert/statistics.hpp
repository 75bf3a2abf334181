#pragma once

// Shot-noise radius from the Bretagnolle-Huber-Carol inequality and
// finite-shot simulation of POVM measurements.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "quantum.hpp"

namespace qcert {

// sqrt((2/N) ln(2^m / delta)), evaluated as (2/N)(m ln 2 - ln delta).
inline double bhc_epsilon(std::uint64_t n_shots, std::uint64_t m_outcomes, double delta) {
  if (n_shots == 0) throw ValidationError("bhc_epsilon: number of shots must be positive");
  if (m_outcomes == 0) throw ValidationError("bhc_epsilon: number of outcomes must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("bhc_epsilon: delta must lie in (0, 1]");
  const double log_term = static_cast<double>(m_outcomes) * std::numbers::ln2 - std::log(delta);
  return std::sqrt(2.0 / static_cast<double>(n_shots) * log_term);
}

inline constexpr double kProbabilityClip = 1e-12;

// p_k = tr(E_k rho). Values in [-1e-12, 0) are clipped to zero and the vector
// renormalized; anything more negative is an error. For incomplete effect
// sets (Schroedinger-picture effects) the result is renormalized to sum one
// when `renormalized` is non-null, and the flag reports it.
inline RealVector born_probabilities(const Povm& povm, const DensityMatrix& state,
                                     bool* renormalized = nullptr) {
  if (povm.dim() != state.dim()) throw ValidationError("born_probabilities: dimension mismatch");
  RealVector p(static_cast<Eigen::Index>(povm.size()));
  bool clipped = false;
  for (std::size_t k = 0; k < povm.size(); ++k) {
    double v = real_trace_product(povm[k], state.matrix());
    if (v < 0.0) {
      if (v < -kProbabilityClip)
        throw ValidationError("born_probabilities: negative probability for outcome " +
                              std::to_string(k));
      v = 0.0;
      clipped = true;
    }
    p(static_cast<Eigen::Index>(k)) = v;
  }
  const double total = p.sum();
  bool renorm = false;
  if (!povm.complete()) {
    if (renormalized == nullptr)
      throw ValidationError("born_probabilities: effects are not complete; renormalization must be requested");
    renorm = true;
  }
  if (clipped || renorm) p /= total;
  if (renormalized != nullptr) *renormalized = renorm;
  return p.cwiseMin(1.0);
}

struct MeasurementRecord {
  std::string povm_id;
  std::uint64_t shots = 0;
  std::vector<std::uint64_t> counts;
  bool renormalized = false; // probabilities were rescaled before sampling
};

inline RealVector frequencies(const MeasurementRecord& rec) {
  RealVector f(static_cast<Eigen::Index>(rec.counts.size()));
  for (std::size_t k = 0; k < rec.counts.size(); ++k)
    f(static_cast<Eigen::Index>(k)) = static_cast<double>(rec.counts[k]) / static_cast<double>(rec.shots);
  return f;
}

// N independent categorical draws by inverse CDF.
inline std::vector<std::uint64_t> sample_multinomial(const RealVector& p, std::uint64_t n_shots,
                                                     RngStream& rng) {
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    acc += p(k);
    cdf[static_cast<std::size_t>(k)] = acc;
  }
  std::vector<std::uint64_t> counts(cdf.size(), 0);
  // Last non-empty outcome absorbs the rounding of the cumulative table.
  std::size_t last = 0;
  for (std::size_t k = 0; k < cdf.size(); ++k)
    if (p(static_cast<Eigen::Index>(k)) > 0.0) last = k;
  for (std::uint64_t s = 0; s < n_shots; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cdf.begin());
    if (k > last) k = last;
    ++counts[k];
  }
  return counts;
}

inline MeasurementRecord simulate_measurement(const Povm& povm, const DensityMatrix& state,
                                              std::uint64_t n_shots, RngStream& rng) {
  if (n_shots == 0) throw ValidationError("simulate_measurement: number of shots must be positive");
  MeasurementRecord rec;
  rec.povm_id = povm.id();
  rec.shots = n_shots;
  const RealVector p = born_probabilities(povm, state, &rec.renormalized);
  rec.counts = sample_multinomial(p, n_shots, rng);
  return rec;
}

// Fraction of simulated experiments with ||f - p||_1 above the BHC radius.
inline double bhc_coverage_trial(const RealVector& p, std::uint64_t n_shots, double delta,
                                 std::uint64_t n_trials, RngStream& rng) {
  if (n_trials == 0) throw ValidationError("bhc_coverage_trial: need at least one trial");
  const double eps = bhc_epsilon(n_shots, static_cast<std::uint64_t>(p.size()), delta);
  std::uint64_t violations = 0;
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const auto counts = sample_multinomial(p, n_shots, rng);
    double l1 = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k)
      l1 += std::abs(static_cast<double>(counts[static_cast<std::size_t>(k)]) / static_cast<double>(n_shots) - p(k));
    if (l1 > eps) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(n_trials);
}

} // namespace qcert
