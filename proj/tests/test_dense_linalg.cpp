#include <gtest/gtest.h>

#include <random>

#include "funnel_sqp/dense_linalg.hpp"
#include "oracles.hpp"

using namespace funnel_sqp;

namespace {

Matrix random_symmetric(std::mt19937& rng, Eigen::Index n, Eigen::Index rank_cut) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) q(i, j) = g(rng);
  const Matrix orth = Eigen::HouseholderQR<Matrix>(q).householderQ();
  Vector eig(n);
  std::uniform_int_distribution<int> sign(0, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    // well-separated eigenvalues of either sign, with exact zeros on request
    const double mag = 0.5 + std::abs(g(rng));
    eig[i] = i < rank_cut ? (sign(rng) == 0 ? -mag : mag) : 0.0;
  }
  Matrix m = orth * eig.asDiagonal() * orth.transpose();
  return 0.5 * (m + m.transpose());
}

Inertia reference_inertia(const Matrix& m) {
  const Vector ev = oracle::jacobi_eigenvalues(m);
  const double tol = 1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Inertia in;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) {
      ++in.n_pos;
    } else if (ev[i] < -tol) {
      ++in.n_neg;
    } else {
      ++in.n_zero;
    }
  }
  return in;
}

}  // namespace

TEST(Ldlt, ReconstructsAndMatchesJacobiInertia) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = dim(rng);
    std::uniform_int_distribution<Eigen::Index> cut(0, n);
    const Eigen::Index rank = trial % 4 == 0 ? cut(rng) : n;
    const Matrix m = random_symmetric(rng, n, rank);
    const auto f = ldlt_factorize(m);
    EXPECT_LE((f.reconstruct() - m).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
    const Inertia expected = reference_inertia(m);
    EXPECT_EQ(f.inertia, expected) << "trial " << trial << " n=" << n;
    EXPECT_EQ(f.inertia.n_pos + f.inertia.n_neg + f.inertia.n_zero,
              static_cast<std::size_t>(n));
  }
}

TEST(Ldlt, KktMatrixInertia) {
  // [[2I, a], [aᵀ, 0]] with a ≠ 0 has inertia (n, 1, 0)
  Matrix k = Matrix::Zero(3, 3);
  k(0, 0) = 2;
  k(1, 1) = 2;
  k(0, 2) = k(2, 0) = 1;
  k(1, 2) = k(2, 1) = 1;
  const auto f = ldlt_factorize(k);
  EXPECT_EQ(f.inertia, (Inertia{2, 1, 0}));
}

TEST(Ldlt, TwoByTwoPivotOnZeroDiagonal) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  const auto f = ldlt_factorize(m);
  EXPECT_EQ(f.block_size[0], 2);
  EXPECT_EQ(f.inertia, (Inertia{1, 1, 0}));
  Vector b(2);
  b << 3, 4;
  EXPECT_LE((m * f.solve(b) - b).norm(), 1e-14);
}

TEST(Ldlt, SolveAccuracyOnNonsingular) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 7;
    const Matrix m = random_symmetric(rng, n, n);
    const Vector b = Vector::Random(n);
    const Vector x = ldlt_factorize(m).solve(b);
    EXPECT_LE((m * x - b).norm(), 1e-10 * (1.0 + b.norm()));
  }
}

TEST(Ldlt, ZeroMatrix) {
  const auto f = ldlt_factorize(Matrix::Zero(3, 3));
  EXPECT_EQ(f.inertia, (Inertia{0, 0, 3}));
  EXPECT_EQ(f.solve(Vector::Ones(3)), Vector::Zero(3));
}

TEST(NullSpace, OrthonormalAndAnnihilating) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Eigen::Index m = trial % 3;
    Matrix a = Matrix::Random(n, m);
    if (m == 2 && trial % 2 == 0) a.col(1) = 2.0 * a.col(0);  // dependent columns
    const Matrix z = nullspace_basis(a);
    const auto rank = static_cast<Eigen::Index>(numerical_rank(a));
    EXPECT_EQ(z.cols(), n - rank);
    if (z.cols() == 0) continue;
    EXPECT_LE((z.transpose() * z - Matrix::Identity(z.cols(), z.cols())).norm(), 1e-12);
    if (m > 0) EXPECT_LE((a.transpose() * z).norm(), 1e-12);
  }
}

TEST(NullSpace, RankAndIndependentColumns) {
  Matrix a(3, 3);
  a << 1, 2, 0,
       0, 0, 1,
       1, 2, 0;
  EXPECT_EQ(numerical_rank(a), 2u);
  const auto cols = independent_columns(a);
  ASSERT_EQ(cols.size(), 2u);
  EXPECT_EQ(cols[1], 2u);
  EXPECT_EQ(numerical_rank(Matrix::Zero(3, 2)), 0u);
}

TEST(LeastSquares, ConsistentAndInconsistentSystems) {
  Matrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  Vector y(2);
  y << 2, -1;
  EXPECT_LE((least_squares(a, a * y) - y).norm(), 1e-12);
  Vector b(3);
  b << 1, 1, 0;
  const Vector x = least_squares(a, b);
  // normal equations hold at the minimizer
  EXPECT_LE((a.transpose() * (a * x - b)).norm(), 1e-12);
}
