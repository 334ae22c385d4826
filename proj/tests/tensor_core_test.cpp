#include "zeno_schur/tensor_core.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

namespace zeno_schur {
namespace {

using zs_test::random_sym;

TEST(SymMatrixTest, RejectsAsymmetricInput) {
  MatrixXd m(2, 2);
  m << 1, 2, 2.1, 1;
  EXPECT_THROW(SymMatrix{m}, NotSymmetric);
  m(1, 0) = 2.0 + 1e-14;
  EXPECT_NO_THROW(SymMatrix{m});
}

TEST(SymMatrixTest, RejectsNonFinite) {
  MatrixXd m = MatrixXd::Identity(2, 2);
  m(0, 0) = std::nan("");
  EXPECT_THROW(SymMatrix{m}, std::invalid_argument);
}

TEST(SchurComplementTest, ZeroCouplingReturnsA) {
  std::mt19937_64 rng(1);
  const SymMatrix a = random_sym(rng, 4);
  const SymMatrix q = schur_complement({a, MatrixXd::Zero(4, 3), SymMatrix::identity(3)});
  EXPECT_EQ(q, a);
}

TEST(SchurComplementTest, ScalarSignFlip) {
  MatrixXd b(1, 1);
  b << 2.0;
  const SymMatrix q = schur_complement(
      {SymMatrix::diagonal({1.0}), b, SymMatrix::diagonal({2.0})});
  EXPECT_DOUBLE_EQ(q(0, 0), -1.0);
}

TEST(SchurComplementTest, TwoByTwoAgainstDenseOracle) {
  const SymMatrix a = SymMatrix::diagonal({2.0, 2.0});
  const MatrixXd b = MatrixXd::Ones(2, 2);
  const SymMatrix c = SymMatrix::identity(2);
  // Oracle: explicit LU inverse, independent of the eigendecomposition route.
  const MatrixXd oracle = a.matrix() - b * c.matrix().inverse() * b.transpose();
  MatrixXd expected(2, 2);
  expected << 0, -2, -2, 0;
  ASSERT_TRUE(oracle.isApprox(expected, 1e-14));

  const SymMatrix q = schur_complement({a, b, c});
  EXPECT_TRUE(q.matrix().isApprox(expected, 1e-13));
  const VectorXd ev = q.eigenvalues();
  EXPECT_NEAR(ev(0), -2.0, 1e-13);
  EXPECT_NEAR(ev(1), 2.0, 1e-13);
}

TEST(SchurComplementTest, RandomMatchesDenseOracle) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const SymMatrix a = random_sym(rng, 3);
    const MatrixXd b = zs_test::gaussian(rng, 3, 4);
    const SymMatrix c = zs_test::random_pd(rng, 4);
    const MatrixXd oracle = a.matrix() - b * c.matrix().inverse() * b.transpose();
    EXPECT_LT((schur_complement({a, b, c}).matrix() - oracle).norm(),
              1e-10 * (1 + oracle.norm()));
  }
}

TEST(SchurComplementTest, FastSectorMustBePositiveDefinite) {
  const SymMatrix a = SymMatrix::identity(2);
  const MatrixXd b = MatrixXd::Ones(2, 2);
  EXPECT_THROW(schur_complement({a, b, SymMatrix::diagonal({1.0, 0.0})}),
               FastSectorNotPD);
  EXPECT_THROW(schur_complement({a, b, SymMatrix::diagonal({1.0, -3.0})}),
               FastSectorNotPD);
  EXPECT_THROW(schur_complement({a, b, SymMatrix::diagonal({1.0, 1e-12})}),
               FastSectorNotPD);
}

TEST(SchurComplementTest, SubtractiveOrderingAndMonotoneCoupling) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const SymMatrix a = random_sym(rng, 3);
    const MatrixXd b = zs_test::gaussian(rng, 3, 2);
    const SymMatrix c = zs_test::random_pd(rng, 2);
    const SymMatrix q = schur_complement({a, b, c});
    EXPECT_GE(zs_test::min_eig(a.matrix() - q.matrix()),
              -1e-10 * std::max(1.0, operator_norm(a)));
    double prev = std::numeric_limits<double>::infinity();
    for (double s = 0.0; s <= 1.0; s += 0.125) {
      const double lam = schur_complement({a, s * b, c}).eigenvalues()(0);
      EXPECT_LE(lam, prev + 1e-12);
      prev = lam;
    }
  }
}

TEST(SignatureTest, Examples) {
  EXPECT_EQ(signature(SymMatrix::diagonal({1, -1, -1, -1}), 1e-10), (Signature{1, 3, 0}));
  EXPECT_EQ(signature(SymMatrix::identity(4)), (Signature{4, 0, 0}));
  EXPECT_EQ(signature(SymMatrix::zero(3)), (Signature{0, 0, 3}));
}

TEST(SignatureTest, BandIsRelativeToOperatorNorm) {
  EXPECT_EQ(signature(SymMatrix::diagonal({1e6, 1e-5, -1})), (Signature{1, 1, 1}));
  EXPECT_EQ(signature(SymMatrix::diagonal({1.0, 1e-5, -1})), (Signature{2, 1, 0}));
  EXPECT_THROW(signature(SymMatrix::identity(2), -1.0), std::invalid_argument);
}

TEST(SignatureTest, InvariantUnderPositiveScaling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int t = 0; t < 200; ++t) {
    const SymMatrix m = random_sym(rng, 5);
    EXPECT_EQ(signature(m), signature(scale(rng) * m));
  }
}

TEST(IsoTracelessTest, Examples) {
  const auto id = iso_traceless(SymMatrix::identity(3));
  EXPECT_DOUBLE_EQ(id.q, 1.0);
  EXPECT_EQ(id.s, SymMatrix::zero(3));

  const auto d = iso_traceless(SymMatrix::diagonal({3, 0, 0}));
  EXPECT_DOUBLE_EQ(d.q, 1.0);
  EXPECT_EQ(d.s, SymMatrix::diagonal({2, -1, -1}));
}

TEST(IsoTracelessTest, ExactOrthogonalReconstruction) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const SymMatrix m = random_sym(rng, 5);
    const auto split = iso_traceless(m);
    const double scale = 1 + m.frobenius_norm();
    EXPECT_LE(std::abs(split.s.trace()), 1e-12 * scale);
    const MatrixXd rebuilt = split.q * MatrixXd::Identity(5, 5) + split.s.matrix();
    EXPECT_LE((rebuilt - m.matrix()).cwiseAbs().maxCoeff(), 1e-12 * scale);
    // <qI, S>_F = q tr(S)
    EXPECT_LE(std::abs(split.q * split.s.trace()), 1e-12 * scale * scale);
  }
}

TEST(OperatorNormTest, Examples) {
  EXPECT_DOUBLE_EQ(operator_norm(SymMatrix::diagonal({2, -3})), 3.0);
  EXPECT_DOUBLE_EQ(operator_norm(SymMatrix::zero(3)), 0.0);
  VectorXd v(3);
  v << 1, 2, std::sqrt(2.0);  // |v|^2 = 7
  EXPECT_NEAR(operator_norm(SymMatrix::symmetrize(v * v.transpose())), 7.0, 1e-12);
}

TEST(SeparationCheckTest, Examples) {
  const auto id = separation_check(SymMatrix::identity(3));
  EXPECT_TRUE(id.holds);
  EXPECT_DOUBLE_EQ(id.q, 1.0);
  EXPECT_NEAR(id.s_norm, 0.0, 1e-15);

  const auto split = separation_check(SymMatrix::diagonal({2, -1}));
  EXPECT_FALSE(split.holds);
  EXPECT_DOUBLE_EQ(split.q, 0.5);
  EXPECT_DOUBLE_EQ(split.s_norm, 1.5);

  const auto neg = separation_check(SymMatrix::diagonal({-3, -2, -2.5}));
  EXPECT_TRUE(neg.holds);
  EXPECT_NEAR(neg.q, -2.5, 1e-15);
  EXPECT_NEAR(neg.s_norm, 0.5, 1e-15);
}

TEST(StabilityMarginTest, Examples) {
  EXPECT_DOUBLE_EQ(stability_margin(SymMatrix::diagonal({-1, -2, -3})), 1.0);
  EXPECT_DOUBLE_EQ(stability_margin(SymMatrix::identity(3)), -1.0);
  EXPECT_DOUBLE_EQ(stability_margin(SymMatrix::diagonal({-0.2, -5, -5})), 0.2);
}

TEST(PerturbationTest, WeylBound) {
  const SymMatrix q = SymMatrix::diagonal({-1, -1, -1});
  const SymMatrix a = SymMatrix::diagonal({0.5, -0.25, -0.25});
  ASSERT_DOUBLE_EQ(operator_norm(a), 0.5);
  EXPECT_TRUE(perturbation_preserves_signature(q, a));
  EXPECT_EQ(signature(q + a).n_minus, 3);
  EXPECT_TRUE(perturbation_preserves_signature(q, SymMatrix::zero(3)));
  EXPECT_FALSE(perturbation_preserves_signature(SymMatrix::identity(3), SymMatrix::zero(3)));
  EXPECT_THROW(perturbation_preserves_signature(q, SymMatrix::zero(2)), std::invalid_argument);
}

TEST(PerturbationTest, RandomPairsNeverChangeNegativeCount) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> frac(0.0, 0.999);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    // Random negative definite tangential block.
    const SymMatrix q = -1.0 * zs_test::random_pd(rng, 3, 0.05);
    const SymMatrix dir = random_sym(rng, 3);
    const SymMatrix a = (frac(rng) * stability_margin(q) / operator_norm(dir)) * dir;
    ASSERT_TRUE(perturbation_preserves_signature(q, a));
    EXPECT_EQ(signature(q + a).n_minus, signature(q).n_minus);
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

}  // namespace
}  // namespace zeno_schur
