#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace qcert;
using qcert::testing::random_povm;

namespace {

// Z basis seen through exp(-i g sigma^y); d_op to the Z basis is |sin g|.
Povm rotated_z(double g) {
  return noisy_povm({noise_channel(NoiseModel::rotation, 2.0 * g)}, {computational_povm(1)});
}

std::vector<double> gamma_grid() {
  std::vector<double> out;
  for (int i = 0; i < 20; ++i) out.push_back(-3.0 + 6.2 * i / 19.0);
  return out;
}

} // namespace

TEST(DopExact, IdenticalPovms) {
  EXPECT_EQ(d_op_exact(sic_povm_qubit(), sic_povm_qubit()).value, 0.0);
}

TEST(DopExact, RotatedBasisSixthPi) {
  const DistanceReport r = d_op_exact(computational_povm(1), rotated_z(std::numbers::pi / 6));
  EXPECT_NEAR(r.value, 0.5, 1e-12);
  EXPECT_EQ(r.kind, DistanceKind::exact);
  ASSERT_EQ(r.detail.size(), 2U);
  EXPECT_EQ(r.detail[0], 1.0); // outcome 0 always belongs to the visited subsets
}

TEST(DopExact, HalfEnumerationMatchesFullOracle) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 1 + trial % 3;
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 9);
    const Povm e = random_povm(d, m, rng), f = random_povm(d, m, rng);
    EXPECT_NEAR(d_op_exact(e, f).value, qcert::testing::d_op_brute_force(e, f), 1e-10) << "m=" << m;
  }
}

TEST(DopExact, IncompleteEffectsUseFullEnumeration) {
  const KrausChannel ad = noise_channel(NoiseModel::amplitude_damping, 0.4);
  const Povm e = sic_povm_qubit();
  const Povm f = noisy_povm({ad}, {e}, EffectConvention::schrodinger);
  ASSERT_FALSE(f.complete());
  EXPECT_NEAR(d_op_exact(e, f).value, qcert::testing::d_op_brute_force(e, f), 1e-12);
}

TEST(DopExact, CutoffAndShapeErrors) {
  std::mt19937_64 rng(53);
  const Povm e = random_povm(2, 21, rng);
  EXPECT_THROW(d_op_exact(e, e), CutoffError);
  EXPECT_NEAR(d_op_exact(e, e, 21).value, 0.0, 1e-12);
  EXPECT_THROW(d_op_exact(computational_povm(1), sic_povm_qubit()), ValidationError);
  EXPECT_THROW(d_op_exact(computational_povm(2), computational_povm(1)), ValidationError);
}

TEST(DopExact, AtMostOne) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const Povm e = random_povm(2, 3, rng), f = random_povm(2, 3, rng);
    EXPECT_LE(d_op_exact(e, f).value, 1.0 + 1e-9);
  }
  // Orthogonal bases reach the maximum.
  std::vector<ComplexMatrix> swapped = {computational_povm(1)[1], computational_povm(1)[0]};
  EXPECT_NEAR(d_op_exact(computational_povm(1), Povm(swapped)).value, 1.0, 1e-15);
}

TEST(DopLocalBound, Examples) {
  const double g = 0.4;
  const Povm z = computational_povm(1), r = rotated_z(g);
  EXPECT_NEAR(d_op_local_bound({{z, r}}).value, d_op_exact(z, r).value, 1e-15);
  EXPECT_EQ(d_op_local_bound({{z, z}, {z, z}}).value, 0.0);
  const DistanceReport two = d_op_local_bound({{z, r}, {z, r}});
  EXPECT_NEAR(two.value, 2.0 * std::abs(std::sin(g)), 1e-12);
  ASSERT_EQ(two.detail.size(), 2U);
  const Povm e = tensor_povm({z, z}), f = tensor_povm({r, r});
  EXPECT_LE(d_op_exact(e, f).value, two.value + 1e-12);
}

TEST(DopNormBound, Examples) {
  EXPECT_EQ(d_op_norm_bound(sic_povm_qubit(), sic_povm_qubit()).value, 0.0);
  for (double g : gamma_grid())
    EXPECT_NEAR(d_op_norm_bound(computational_povm(1), rotated_z(g)).value, std::abs(std::sin(g)), 1e-12);
}

TEST(DopFrobeniusBound, Examples) {
  EXPECT_EQ(d_op_frobenius_bound(sic_povm_qubit(), sic_povm_qubit()).value, 0.0);
  // Projector difference at angle g: ||D||_F^2 = 2 sin^2 g, tr D = 0, two outcomes.
  const double g = std::numbers::pi / 6;
  const double v = d_op_frobenius_bound(computational_povm(1), rotated_z(g)).value;
  EXPECT_NEAR(v, std::sqrt(2.0) * std::sin(g), 1e-12);
  EXPECT_GE(v, 0.5);
}

TEST(DopFidelityBound, Examples) {
  const Povm z = computational_povm(1);
  EXPECT_EQ(d_op_fidelity_bound(z, z).value, 0.0);
  for (double g : gamma_grid())
    EXPECT_NEAR(d_op_fidelity_bound(z, rotated_z(g)).value, std::abs(std::sin(g)), 1e-12);
}

TEST(DopFidelityBound, PreconditionsNameTheOutcome) {
  // Rank-two effect as outcome 1.
  ComplexMatrix half = 0.5 * ComplexMatrix::Identity(2, 2);
  const Povm e({computational_povm(1)[0] * 0.5, half, computational_povm(1)[1] * 0.5});
  try {
    d_op_fidelity_bound(e, e);
    FAIL() << "expected a precondition error";
  } catch (const OutcomePreconditionError& err) {
    EXPECT_EQ(err.outcome(), 1U);
  }
  // Amplitude damping in the Heisenberg picture changes tr(F_k).
  const Povm z = computational_povm(1);
  const Povm f = noisy_povm({noise_channel(NoiseModel::amplitude_damping, 0.2)}, {z});
  try {
    d_op_fidelity_bound(z, f);
    FAIL() << "expected a precondition error";
  } catch (const OutcomePreconditionError& err) {
    EXPECT_EQ(err.outcome(), 0U);
  }
}

TEST(DopFidelityBound, SchrodingerDampingKeepsTraces) {
  const Povm sic = sic_povm_qubit();
  const Povm f = noisy_povm({noise_channel(NoiseModel::amplitude_damping, 0.2)}, {sic}, EffectConvention::schrodinger);
  EXPECT_GE(d_op_fidelity_bound(sic, f).value, d_op_exact(sic, f).value - 1e-12);
}

TEST(Distance, OrderingChainOnRandomInstances) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = trial % 2 == 0 ? 2 : 4;
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 5);
    const Povm e = random_povm(d, m, rng), f = random_povm(d, m, rng);
    const double exact = d_op_exact(e, f).value;
    const double norm = d_op_norm_bound(e, f).value;
    const double frob = d_op_frobenius_bound(e, f).value;
    EXPECT_LE(exact, norm + 1e-9);
    EXPECT_LE(norm, frob + 1e-9);
  }
}

TEST(Distance, SymmetricInArguments) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    const Povm e = random_povm(2, 4, rng), f = random_povm(2, 4, rng);
    EXPECT_NEAR(d_op_exact(e, f).value, d_op_exact(f, e).value, 1e-12);
    EXPECT_NEAR(d_op_norm_bound(e, f).value, d_op_norm_bound(f, e).value, 1e-12);
    EXPECT_NEAR(d_op_frobenius_bound(e, f).value, d_op_frobenius_bound(f, e).value, 1e-12);
    EXPECT_NEAR(d_op_two_design_estimate(e, f, pauli_design_qubit()).value,
                d_op_two_design_estimate(f, e, pauli_design_qubit()).value, 1e-12);
  }
  const Povm z = computational_povm(1), r = rotated_z(0.3);
  EXPECT_NEAR(d_op_fidelity_bound(z, r).value, d_op_fidelity_bound(r, z).value, 1e-12);
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const Povm e = random_povm(2, 3, rng), f = random_povm(2, 3, rng), g = random_povm(2, 3, rng);
    EXPECT_LE(d_op_exact(e, g).value, d_op_exact(e, f).value + d_op_exact(f, g).value + 1e-12);
  }
}

TEST(Distance, ProductAtMostLocalBound) {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const Povm e1 = random_povm(2, 2 + trial % 3, rng), f1 = qcert::testing::perturbed_povm(e1, 0.2, rng);
    const Povm e2 = random_povm(2, 2 + trial % 2, rng), f2 = qcert::testing::perturbed_povm(e2, 0.3, rng);
    const double product = d_op_exact(tensor_povm({e1, e2}), tensor_povm({f1, f2})).value;
    EXPECT_LE(product, d_op_local_bound({{e1, f1}, {e2, f2}}).value + 1e-9);
  }
}

TEST(TwoDesign, FrameOperatorValidation) {
  EXPECT_TRUE(is_two_design(pauli_design_qubit()));
  for (int n = 1; n <= 3; ++n) EXPECT_TRUE(is_two_design(stabilizer_design(n))) << n;
  EXPECT_EQ(stabilizer_design(1).size(), 6U);
  EXPECT_EQ(stabilizer_design(2).size(), 60U);
  // Computational basis alone is not a 2-design; neither are products of qubit Pauli states.
  std::vector<PureState> z = {PureState::basis(2, 0), PureState::basis(2, 1)};
  EXPECT_FALSE(is_two_design(z));
  std::vector<PureState> products;
  for (const auto& a : pauli_design_qubit())
    for (const auto& b : pauli_design_qubit()) products.push_back(tensor(a, b));
  EXPECT_FALSE(is_two_design(products));
  EXPECT_THROW(stabilizer_design(0), ValidationError);
}

TEST(TwoDesign, ExactAverageEqualsFrobeniusBound) {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 50; ++trial) {
    const Povm e = random_povm(2, 2 + trial % 4, rng), f = random_povm(2, e.size(), rng);
    EXPECT_NEAR(d_op_two_design_estimate(e, f, pauli_design_qubit()).value, d_op_frobenius_bound(e, f).value, 1e-9);
  }
  const auto design = stabilizer_design(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Povm e = random_povm(4, 3, rng), f = random_povm(4, 3, rng);
    EXPECT_NEAR(d_op_two_design_estimate(e, f, design).value, d_op_frobenius_bound(e, f).value, 1e-9);
  }
}

TEST(TwoDesign, IdenticalPovmsAndErrors) {
  EXPECT_NEAR(d_op_two_design_estimate(sic_povm_qubit(), sic_povm_qubit(), pauli_design_qubit()).value, 0.0, 1e-15);
  std::vector<PureState> z = {PureState::basis(2, 0), PureState::basis(2, 1)};
  EXPECT_THROW(d_op_two_design_estimate(sic_povm_qubit(), sic_povm_qubit(), z), ValidationError);
  EXPECT_THROW(d_op_two_design_estimate(sic_povm_qubit(), sic_povm_qubit(), stabilizer_design(2)), ValidationError);
  EXPECT_THROW(d_op_two_design_estimate(sic_povm_qubit(), sic_povm_qubit(), pauli_design_qubit(),
                                        SampledAverage{0, RngStream(1)}),
               ValidationError);
}

TEST(TwoDesign, SampledConvergesToExactAverage) {
  std::mt19937_64 rng(58);
  const Povm e = sic_povm_qubit();
  const Povm f = qcert::testing::perturbed_povm(e, 0.3, rng);
  const double exact = d_op_two_design_estimate(e, f, pauli_design_qubit()).value;
  const DistanceReport sampled =
      d_op_two_design_estimate(e, f, pauli_design_qubit(), SampledAverage{1000000, RngStream(59)});
  EXPECT_GT(sampled.std_error, 0.0);
  EXPECT_LT(sampled.std_error, 0.01);
  EXPECT_NEAR(sampled.value, exact, 3.0 * sampled.std_error);
}
