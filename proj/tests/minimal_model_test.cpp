#include "zeno_schur/minimal_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <queue>

#include "test_util.hpp"

namespace zeno_schur {
namespace {

TEST(BuildBlocksTest, Examples) {
  MinimalModelSpec spec;
  const auto zero = build_blocks(spec);
  EXPECT_TRUE(zero.b.isZero(0.0));
  EXPECT_EQ(schur_complement(zero), SymMatrix::identity(2));

  for (double g : {0.1, 1.0, 7.0}) {
    spec.g = g;
    EXPECT_EQ(signature(build_blocks(spec).c), (Signature{2, 0, 0}));
  }

  spec.chi = 1.0;
  spec.g = 1.0;
  EXPECT_LE(schur_complement(build_blocks(spec)).frobenius_norm(), 1e-15);
}

TEST(BuildBlocksTest, Validation) {
  MinimalModelSpec spec;
  spec.g = 0;
  EXPECT_THROW(build_blocks(spec), std::invalid_argument);
  spec = MinimalModelSpec{};
  spec.b0 = MatrixXd::Zero(2, 2);
  EXPECT_THROW(build_blocks(spec), std::invalid_argument);
  spec = MinimalModelSpec{};
  spec.chi = -1;
  EXPECT_THROW(build_blocks(spec), std::invalid_argument);
}

double closed_form(double chi, double g, const MatrixXd& b0) {
  const double s = Eigen::JacobiSVD<MatrixXd>(b0).singularValues()(0);
  return 1.0 - chi * chi * s * s / g;
}

TEST(BEffFinalTest, MatchesClosedForm) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    MinimalModelSpec spec;
    spec.b0 = zs_test::gaussian(rng, 2, 3);
    spec.chi = std::uniform_real_distribution<double>(0, 2)(rng);
    spec.g = std::uniform_real_distribution<double>(0.1, 5)(rng);
    EXPECT_NEAR(b_eff_final(spec), closed_form(spec.chi, spec.g, spec.b0), 1e-10);
  }
  EXPECT_DOUBLE_EQ(b_eff_final(MinimalModelSpec{}), 1.0);
}

TEST(BEffFinalTest, SignChangesAcrossCriticalChi) {
  for (double g : {0.25, 1.0, 4.0}) {
    MinimalModelSpec spec;
    spec.g = g;
    spec.b0 << 1.0, 0.5, -0.2, 0.7;
    const double chi_star = critical_chi(spec);
    spec.chi = chi_star * 0.99;
    EXPECT_GT(b_eff_final(spec), 0.0);
    spec.chi = chi_star * 1.01;
    EXPECT_LT(b_eff_final(spec), 0.0);
  }
  MinimalModelSpec spec;
  spec.g = 2.0;
  EXPECT_NEAR(critical_chi(spec), std::sqrt(2.0), 1e-15);
}

TEST(BEffFinalTest, IncreasingInCouplingDecreasingInChi) {
  MinimalModelSpec spec;
  spec.chi = 0.8;
  double prev = -1e300;
  for (double g = 0.2; g <= 5.0; g += 0.2) {
    spec.g = g;
    const double b = b_eff_final(spec);
    EXPECT_GT(b, prev);
    prev = b;
  }
  spec.g = 1.0;
  prev = 1e300;
  for (double chi = 0.0; chi <= 3.0; chi += 0.1) {
    spec.chi = chi;
    const double b = b_eff_final(spec);
    EXPECT_LE(b, prev);
    prev = b;
  }
}

TEST(BEffFinalTest, ZeroCouplingGivesLowestSlowEigenvalue) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    MinimalModelSpec spec;
    spec.a_override = zs_test::random_sym(rng, 2);
    spec.g = 0.5 + t;
    EXPECT_NEAR(b_eff_final(spec), spec.a_override->eigenvalues()(0), 1e-12);
  }
}

TEST(BEffFinalTest, NegativeExactlyWhenSomeDirectionIsNegative) {
  for (double chi = 0.0; chi <= 2.0; chi += 0.05) {
    MinimalModelSpec spec;
    spec.chi = chi;
    spec.b0 << 1.0, 0.3, 0.3, 0.2;
    const SymMatrix q = schur_complement(build_blocks(spec));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q.matrix());
    const VectorXd v = es.eigenvectors().col(0);
    const double form = v.dot(q.matrix() * v);
    const double b = b_eff_final(spec);
    if (std::abs(b) < 1e-12) continue;
    EXPECT_EQ(b < 0, form < 0) << "chi " << chi;
  }
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[std::size_t(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

TEST(ScanTest, BelowCriticalEverywhereIsPositive) {
  const auto s = scan(linspace(0, 0.4, 5), linspace(1, 3, 4), MinimalModelSpec{});
  EXPECT_TRUE(s.zero_contour.empty());
  EXPECT_GT(s.field.values.minCoeff(), 0.0);
}

TEST(ScanTest, ZeroContourTracksSquareRootLaw) {
  const auto chi = linspace(0, 3, 31), g = linspace(0.2, 4, 20);
  const auto s = scan(chi, g, MinimalModelSpec{});
  ASSERT_FALSE(s.zero_contour.empty());
  const double half = 0.5 * (chi[1] - chi[0]);
  for (const auto& p : s.zero_contour.points()) {
    EXPECT_LE(std::abs(p.x - std::sqrt(p.y)), half);
  }
}

TEST(ScanTest, FixedCouplingCutIsStrictlyDecreasing) {
  const auto s = scan(linspace(0, 3, 40), {1.5}, MinimalModelSpec{});
  for (Index i = 1; i < s.field.values.cols(); ++i) {
    EXPECT_LT(s.field.values(0, i), s.field.values(0, i - 1));
  }
  EXPECT_TRUE(s.zero_contour.empty());
}

TEST(ScanTest, NegativeRegionIsConnected) {
  const auto s = scan(linspace(0, 3, 25), linspace(0.2, 4, 25), MinimalModelSpec{});
  const MatrixXd& v = s.field.values;
  std::vector<std::vector<bool>> seen(25, std::vector<bool>(25, false));
  int total = 0, start_r = -1, start_c = -1;
  for (int r = 0; r < 25; ++r)
    for (int c = 0; c < 25; ++c)
      if (v(r, c) < 0) {
        ++total;
        if (start_r < 0) start_r = r, start_c = c;
      }
  ASSERT_GT(total, 0);
  std::queue<std::pair<int, int>> todo;
  todo.push({start_r, start_c});
  seen[std::size_t(start_r)][std::size_t(start_c)] = true;
  int reached = 0;
  while (!todo.empty()) {
    auto [r, c] = todo.front();
    todo.pop();
    ++reached;
    const int dr[] = {1, -1, 0, 0}, dc[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (nr < 0 || nc < 0 || nr >= 25 || nc >= 25) continue;
      if (seen[std::size_t(nr)][std::size_t(nc)] || !(v(nr, nc) < 0)) continue;
      seen[std::size_t(nr)][std::size_t(nc)] = true;
      todo.push({nr, nc});
    }
  }
  EXPECT_EQ(reached, total);
}

TEST(ScanTest, RejectsEmptyGrids) {
  EXPECT_THROW(scan({}, {1.0}, MinimalModelSpec{}), std::invalid_argument);
}

}  // namespace
}  // namespace zeno_schur
