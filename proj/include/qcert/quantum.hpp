#pragma once

// States, measurements, observables and the single-qubit noise channels
// used by the certification experiments.

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"

namespace qcert {

inline constexpr double kStateTol = 1e-10;
inline constexpr double kCompletenessTol = 1e-9;

namespace pauli {
inline ComplexMatrix I() { return ComplexMatrix::Identity(2, 2); }
inline ComplexMatrix X() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline ComplexMatrix Y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
inline ComplexMatrix Z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
} // namespace pauli

// exp(-i angle sigma^y): a real rotation [[cos, -sin], [sin, cos]].
inline ComplexMatrix y_rotation(double angle) {
  ComplexMatrix u(2, 2);
  u << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return u;
}

class PureState {
public:
  explicit PureState(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) throw ValidationError("PureState: empty amplitude vector");
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-12)
      throw ValidationError("PureState: amplitudes are not normalized");
  }

  static PureState normalized(const ComplexVector& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("PureState: zero or non-finite vector");
    return PureState(v / n);
  }

  static PureState basis(Eigen::Index dim, Eigen::Index index) {
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return PureState(v);
  }

  Eigen::Index dim() const { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

  // <psi| A |psi>, real part.
  double expectation(const ComplexMatrix& a) const {
    return (amplitudes_.adjoint() * a * amplitudes_)(0, 0).real();
  }

private:
  ComplexVector amplitudes_;
};

inline PureState tensor(const PureState& a, const PureState& b) {
  ComplexVector v(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    v.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  return PureState::normalized(v);
}

class DensityMatrix {
public:
  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    require_hermitian(matrix_, "DensityMatrix");
    if (std::abs(matrix_.trace().real() - 1.0) > kStateTol)
      throw ValidationError("DensityMatrix: trace differs from one");
    if (hermitian_eig(matrix_).eigenvalues(0) < -kStateTol)
      throw ValidationError("DensityMatrix: matrix is not positive semidefinite");
  }

  static DensityMatrix from_pure(const PureState& psi) { return DensityMatrix(psi.projector()); }
  static DensityMatrix maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

private:
  ComplexMatrix matrix_;
};

inline DensityMatrix project_density(const ComplexMatrix& a) {
  return DensityMatrix(project_density_matrix(a));
}

class Observable {
public:
  explicit Observable(ComplexMatrix m) : matrix_(std::move(m)) {
    require_hermitian(matrix_, "Observable");
  }
  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

private:
  ComplexMatrix matrix_;
};

// Ordered list of effects. Constructed through `Povm(...)` the effects are
// checked to be PSD and complete; `Povm::unchecked` skips completeness, which
// is needed for effects transformed by a non-unital channel in the
// Schroedinger picture.
class Povm {
public:
  Povm(std::vector<ComplexMatrix> effects, std::string id = "povm")
      : effects_(std::move(effects)), id_(std::move(id)) {
    validate_shape();
    validate_positive();
    const ComplexMatrix sum = total();
    const ComplexMatrix id_mat = ComplexMatrix::Identity(dim(), dim());
    if (((sum - id_mat).cwiseAbs().maxCoeff()) > kCompletenessTol)
      throw ValidationError("Povm '" + id_ + "': effects do not sum to the identity");
    complete_ = true;
  }

  static Povm unchecked(std::vector<ComplexMatrix> effects, std::string id) {
    Povm p;
    p.effects_ = std::move(effects);
    p.id_ = std::move(id);
    p.validate_shape();
    p.validate_positive();
    const ComplexMatrix sum = p.total();
    p.complete_ = (sum - ComplexMatrix::Identity(p.dim(), p.dim())).cwiseAbs().maxCoeff() <=
                  kCompletenessTol;
    return p;
  }

  std::size_t size() const { return effects_.size(); }
  Eigen::Index dim() const { return effects_.front().rows(); }
  const ComplexMatrix& operator[](std::size_t k) const { return effects_[k]; }
  const std::vector<ComplexMatrix>& effects() const { return effects_; }
  const std::string& id() const { return id_; }
  bool complete() const { return complete_; }

  ComplexMatrix total() const {
    ComplexMatrix sum = ComplexMatrix::Zero(dim(), dim());
    for (const auto& e : effects_) sum += e;
    return sum;
  }

private:
  Povm() = default;

  void validate_shape() const {
    if (effects_.empty()) throw ValidationError("Povm: no effects");
    const Eigen::Index d = effects_.front().rows();
    for (const auto& e : effects_) {
      if (e.rows() != d || e.cols() != d) throw ValidationError("Povm: effects differ in dimension");
      require_hermitian(e, "Povm effect");
    }
  }

  void validate_positive() const {
    for (std::size_t k = 0; k < effects_.size(); ++k)
      if (hermitian_eig(effects_[k]).eigenvalues(0) < -kStateTol)
        throw ValidationError("Povm '" + id_ + "': effect " + std::to_string(k) +
                              " is not positive semidefinite");
  }

  std::vector<ComplexMatrix> effects_;
  std::string id_;
  bool complete_ = false;
};

// Four-outcome qubit SIC with Bloch vectors on a fixed regular tetrahedron.
inline Povm sic_povm_qubit() {
  const double r = 1.0 / std::sqrt(3.0);
  const double dirs[4][3] = {{r, r, r}, {r, -r, -r}, {-r, r, -r}, {-r, -r, r}};
  std::vector<ComplexMatrix> effects;
  for (const auto& n : dirs)
    effects.push_back(0.25 * (pauli::I() + n[0] * pauli::X() + n[1] * pauli::Y() + n[2] * pauli::Z()));
  return Povm(std::move(effects), "sic");
}

inline Povm computational_povm(int n_qubits) {
  if (n_qubits < 1) throw ValidationError("computational_povm: need at least one qubit");
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  std::vector<ComplexMatrix> effects;
  for (Eigen::Index k = 0; k < d; ++k) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(k, k) = 1.0;
    effects.push_back(std::move(e));
  }
  return Povm(std::move(effects), "z" + std::to_string(n_qubits));
}

// Product POVM; outcome k = (k_1 ... k_n) in mixed radix, leftmost factor slowest.
inline Povm tensor_povm(const std::vector<Povm>& locals) {
  if (locals.empty()) throw ValidationError("tensor_povm: no factors");
  std::vector<ComplexMatrix> effects = locals.front().effects();
  std::string id = locals.front().id();
  bool complete = locals.front().complete();
  for (std::size_t i = 1; i < locals.size(); ++i) {
    std::vector<ComplexMatrix> next;
    next.reserve(effects.size() * locals[i].size());
    for (const auto& a : effects)
      for (const auto& b : locals[i].effects()) next.push_back(kron(a, b));
    effects = std::move(next);
    id += "*" + locals[i].id();
    complete = complete && locals[i].complete();
  }
  if (complete) return Povm(std::move(effects), id);
  return Povm::unchecked(std::move(effects), id);
}

enum class NoiseModel { rotation, amplitude_damping, phase_damping, depolarizing };

inline std::string_view to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::rotation: return "rotation";
    case NoiseModel::amplitude_damping: return "amplitude-damping";
    case NoiseModel::phase_damping: return "phase-damping";
    case NoiseModel::depolarizing: return "depolarizing";
  }
  return "unknown";
}

inline NoiseModel parse_noise_model(std::string_view name) {
  if (name == "rotation" || name == "y-rotation") return NoiseModel::rotation;
  if (name == "amplitude-damping" || name == "amplitude_damping") return NoiseModel::amplitude_damping;
  if (name == "phase-damping" || name == "phase_damping") return NoiseModel::phase_damping;
  if (name == "depolarizing") return NoiseModel::depolarizing;
  throw ValidationError("unknown noise model '" + std::string(name) + "'");
}

struct KrausChannel {
  NoiseModel model;
  double gamma;
  std::vector<ComplexMatrix> kraus_ops;
};

// Single-qubit Kraus lists. For `rotation`, K0 = exp(-i (gamma/2) sigma^y).
inline KrausChannel noise_channel(NoiseModel model, double gamma) {
  if (!std::isfinite(gamma)) throw ValidationError("noise_channel: gamma must be finite");
  if (model != NoiseModel::rotation && (gamma < 0.0 || gamma > 1.0))
    throw ValidationError("noise_channel: gamma must lie in [0, 1] for " +
                          std::string(to_string(model)));
  KrausChannel ch{model, gamma, {}};
  switch (model) {
    case NoiseModel::rotation:
      ch.kraus_ops.push_back(y_rotation(gamma / 2.0));
      break;
    case NoiseModel::amplitude_damping: {
      ComplexMatrix k0 = ComplexMatrix::Zero(2, 2);
      k0(0, 0) = 1.0;
      k0(1, 1) = std::sqrt(1.0 - gamma);
      ComplexMatrix k1 = ComplexMatrix::Zero(2, 2);
      k1(0, 1) = std::sqrt(gamma);
      ch.kraus_ops = {k0, k1};
      break;
    }
    case NoiseModel::phase_damping: {
      ComplexMatrix k1 = ComplexMatrix::Zero(2, 2);
      k1(0, 0) = std::sqrt(gamma);
      ComplexMatrix k2 = ComplexMatrix::Zero(2, 2);
      k2(1, 1) = std::sqrt(gamma);
      ch.kraus_ops = {std::sqrt(1.0 - gamma) * pauli::I(), k1, k2};
      break;
    }
    case NoiseModel::depolarizing: {
      const double w = std::sqrt(gamma / 3.0);
      ch.kraus_ops = {std::sqrt(1.0 - gamma) * pauli::I(), w * pauli::X(), w * pauli::Y(),
                      w * pauli::Z()};
      break;
    }
  }
  // gamma = 0 leaves zero operators in the damping/depolarizing lists; drop them.
  std::erase_if(ch.kraus_ops, [](const ComplexMatrix& k) { return k.cwiseAbs().maxCoeff() == 0.0; });
  return ch;
}

inline KrausChannel noise_channel(std::string_view label, double gamma) {
  return noise_channel(parse_noise_model(label), gamma);
}

inline KrausChannel identity_channel() { return noise_channel(NoiseModel::rotation, 0.0); }

// E -> sum_i K_i^dag E K_i (adjoint channel, unital for trace-preserving maps).
inline ComplexMatrix apply_channel_heisenberg(const KrausChannel& ch, const ComplexMatrix& effect) {
  ComplexMatrix out = ComplexMatrix::Zero(effect.rows(), effect.cols());
  for (const auto& k : ch.kraus_ops) {
    if (k.rows() != effect.rows()) throw ValidationError("apply_channel: dimension mismatch");
    out += k.adjoint() * effect * k;
  }
  return 0.5 * (out + out.adjoint());
}

// E -> sum_i K_i E K_i^dag.
inline ComplexMatrix apply_channel_schrodinger(const KrausChannel& ch, const ComplexMatrix& effect) {
  ComplexMatrix out = ComplexMatrix::Zero(effect.rows(), effect.cols());
  for (const auto& k : ch.kraus_ops) {
    if (k.rows() != effect.rows()) throw ValidationError("apply_channel: dimension mismatch");
    out += k * effect * k.adjoint();
  }
  return 0.5 * (out + out.adjoint());
}

enum class EffectConvention { heisenberg, schrodinger };

inline EffectConvention parse_effect_convention(std::string_view s) {
  if (s == "heisenberg") return EffectConvention::heisenberg;
  if (s == "schrodinger" || s == "schroedinger") return EffectConvention::schrodinger;
  throw ValidationError("unknown effect convention '" + std::string(s) + "'");
}

inline Povm noisy_povm(const std::vector<KrausChannel>& channels, const std::vector<Povm>& targets,
                       EffectConvention convention = EffectConvention::heisenberg) {
  if (channels.size() != targets.size())
    throw ValidationError("noisy_povm: one channel per subsystem is required");
  std::vector<Povm> locals;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::vector<ComplexMatrix> effects;
    for (const auto& e : targets[i].effects())
      effects.push_back(convention == EffectConvention::heisenberg
                            ? apply_channel_heisenberg(channels[i], e)
                            : apply_channel_schrodinger(channels[i], e));
    std::string id = targets[i].id() + "~" + std::string(to_string(channels[i].model));
    if (convention == EffectConvention::heisenberg)
      locals.emplace_back(std::move(effects), std::move(id));
    else
      locals.push_back(Povm::unchecked(std::move(effects), std::move(id)));
  }
  return tensor_povm(locals);
}

inline PureState haar_random_pure_state(Eigen::Index dim, RngStream& rng) {
  if (dim < 1) throw ValidationError("haar_random_pure_state: dim must be positive");
  ComplexVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(re, im);
  }
  return PureState::normalized(v);
}

// W = X (x) X + Z (x) Z.
inline Observable witness_operator() {
  return Observable(kron(pauli::X(), pauli::X()) + kron(pauli::Z(), pauli::Z()));
}

// M = (1/n) sum_i sigma^z_i.
inline Observable magnetization_operator(int n_qubits) {
  if (n_qubits < 1) throw ValidationError("magnetization_operator: need at least one qubit");
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    int ones = 0;
    for (int b = 0; b < n_qubits; ++b) ones += static_cast<int>((k >> b) & 1);
    m(k, k) = static_cast<double>(n_qubits - 2 * ones) / n_qubits;
  }
  return Observable(m);
}

// Eigenbasis (+1 first) of cos(theta) X + sin(theta) Z.
inline std::pair<ComplexVector, ComplexVector> tilted_eigenbasis(double theta) {
  const double half = 0.5 * (std::numbers::pi / 2.0 - theta);
  ComplexVector plus(2), minus(2);
  plus << std::cos(half), std::sin(half);
  minus << -std::sin(half), std::cos(half);
  return {plus, minus};
}

// Four product projectors of the eigenbasis of A(theta) (x) A(theta), with
// A(theta) = cos(theta) X + sin(theta) Z. Order: ++, +-, -+, --.
inline Povm witness_setting_povm(double theta, std::string id) {
  const auto [p, m] = tilted_eigenbasis(theta);
  const ComplexVector local[2] = {p, m};
  std::vector<ComplexMatrix> effects;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      ComplexVector v(4);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) v(2 * i + j) = local[a](i) * local[b](j);
      effects.push_back(v * v.adjoint());
    }
  return Povm(std::move(effects), std::move(id));
}

// Both settings merged into one 8-outcome POVM, each projector weighted 1/2.
// Outcomes 0-3 belong to the X-like setting, 4-7 to the Z-like setting.
inline Povm imperfect_witness_povm(double theta_x, double theta_z) {
  const Povm xx = witness_setting_povm(theta_x, "xx");
  const Povm zz = witness_setting_povm(theta_z, "zz");
  std::vector<ComplexMatrix> effects;
  for (const auto& e : xx.effects()) effects.push_back(0.5 * e);
  for (const auto& e : zz.effects()) effects.push_back(0.5 * e);
  return Povm(std::move(effects), "witness");
}

inline Povm ideal_witness_povm() { return imperfect_witness_povm(0.0, std::numbers::pi / 2.0); }

inline PureState bell_phi_plus() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return PureState(v);
}

} // namespace qcert
