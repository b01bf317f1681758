#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "hsgp/errors.hpp"
#include "hsgp/signed_graph.hpp"
#include "test_support.hpp"

using namespace hsgp;
using namespace hsgp::testing;

TEST(SplitSigns, AllPositive) {
  Matrix a(2, 2);
  a << 0, 0.5, 0.5, 0;
  const auto s = split_signs(a);
  EXPECT_TRUE(s.positive == a);
  EXPECT_TRUE(s.negative_abs.isZero(0.0));
}

TEST(SplitSigns, AllNegative) {
  Matrix a(2, 2);
  a << 0, -0.3, -0.3, 0;
  const auto s = split_signs(a);
  EXPECT_TRUE(s.positive.isZero(0.0));
  Matrix want(2, 2);
  want << 0, 0.3, 0.3, 0;
  EXPECT_TRUE(s.negative_abs == want);
}

TEST(SplitSigns, MixedReconstructs) {
  std::mt19937_64 rng(3);
  const Matrix a = random_signed_adjacency(3, rng);
  const auto s = split_signs(a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(s.positive(i, j) - s.negative_abs(i, j), a(i, j), 1e-12);
      EXPECT_EQ(s.positive(i, j) * s.negative_abs(i, j), 0.0);
      EXPECT_GE(s.positive(i, j), 0.0);
      EXPECT_GE(s.negative_abs(i, j), 0.0);
    }
}

TEST(SplitSigns, AsymmetricRejected) {
  Matrix a(2, 2);
  a << 0, 0.5, 0.4, 0;
  try {
    split_signs(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AsymmetricInput);
  }
}

TEST(LaplaceNormalize, SingleEdgeCancelsDegree) {
  Matrix a(2, 2);
  a << 0, 0.37, 0.37, 0;
  const auto n = normalize_signed(a);
  EXPECT_NEAR(n.pos_norm(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(n.pos_norm(1, 0), 1.0, 1e-15);
  EXPECT_TRUE(n.neg_norm.isZero(0.0));
}

TEST(LaplaceNormalize, ZeroMatrixStaysZero) {
  const auto n = normalize_signed(Matrix::Zero(4, 4));
  EXPECT_TRUE(n.pos_norm.isZero(0.0));
  EXPECT_TRUE(n.neg_norm.isZero(0.0));
}

TEST(LaplaceNormalize, PathGraphHandOracle) {
  // 0 - 1 - 2 with unit weights: degrees 1, 2, 1.
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = 1.0;
  const auto n = normalize_signed(a);
  const double want = 1.0 / (std::sqrt(1.0) * std::sqrt(2.0));
  EXPECT_NEAR(n.pos_norm(1, 0), want, 1e-15);
  EXPECT_NEAR(n.pos_norm(1, 2), want, 1e-15);
  EXPECT_NEAR(want, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(n.pos_norm(0, 2), 0.0);
}

TEST(LaplaceNormalize, UniformDegreeDividesByDegree) {
  // Complete graph on 4 nodes with weight w: every degree is 3w.
  const double w = 0.6;
  Matrix a = Matrix::Constant(4, 4, w);
  a.diagonal().setZero();
  const auto n = normalize_signed(a);
  EXPECT_LT(max_abs_diff(n.pos_norm, a / (3 * w)), 1e-15);
}

TEST(LaplaceNormalizeProperty, FiniteNonnegativeSymmetricSpectrum) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<Eigen::Index> n_dist(2, 10);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a = random_signed_adjacency(n_dist(rng), rng);
    if (trial % 7 == 0) {
      a.row(0).setZero();
      a.col(0).setZero();
    }
    if (trial % 11 == 0) a = a.cwiseAbs();
    const auto n = normalize_signed(a);
    for (const Matrix* m : {&n.pos_norm, &n.neg_norm}) {
      ASSERT_TRUE(m->allFinite());
      EXPECT_GE(m->minCoeff(), 0.0);
      EXPECT_TRUE(is_symmetric(*m));
      Eigen::SelfAdjointEigenSolver<Matrix> eig(*m);
      EXPECT_GE(eig.eigenvalues().minCoeff(), -1.0 - 1e-12);
      EXPECT_LE(eig.eigenvalues().maxCoeff(), 1.0 + 1e-12);
    }
  }
}

TEST(LaplaceNormalizeProperty, PermutationEquivariant) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix a = random_signed_adjacency(7, rng);
    const auto perm = random_permutation(7, rng);
    const auto base = normalize_signed(a);
    const auto moved = normalize_signed(permute_symmetric(a, perm));
    EXPECT_LT(max_abs_diff(moved.pos_norm, permute_symmetric(base.pos_norm, perm)), 1e-14);
    EXPECT_LT(max_abs_diff(moved.neg_norm, permute_symmetric(base.neg_norm, perm)), 1e-14);
  }
}

TEST(SymmetricNormalize, IsolatedNodeRowIsZero) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = w(1, 0) = 2.0;
  const Matrix n = symmetric_normalize(w);
  EXPECT_TRUE(n.row(2).isZero(0.0));
  EXPECT_NEAR(n(0, 1), 1.0, 1e-15);
}
