#include "funnel_sqp/dense_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace funnel_sqp {

namespace {

// Eigenvalues of the symmetric 2×2 matrix [[a, b], [b, c]].
std::pair<double, double> eigenvalues_2x2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {mean - radius, mean + radius};
}

void count(Inertia& inertia, double eigenvalue, double tol) {
  if (eigenvalue > tol) {
    ++inertia.n_pos;
  } else if (eigenvalue < -tol) {
    ++inertia.n_neg;
  } else {
    ++inertia.n_zero;
  }
}

}  // namespace

LdltFactors ldlt_factorize(const Matrix& m, const LinalgConfig& config) {
  const auto n = static_cast<std::size_t>(m.rows());
  Matrix s = 0.5 * (m + m.transpose());
  const double norm_inf =
      n == 0 ? 0.0 : s.cwiseAbs().rowwise().sum().maxCoeff();
  const double tol = config.zero_pivot_threshold * norm_inf;
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;

  LdltFactors out;
  out.zero_tolerance = tol;
  out.permutation.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.permutation[i] = i;
  out.lower = Matrix::Identity(n, n);
  out.diagonal = Matrix::Zero(n, n);
  out.block_size.assign(n, 0);

  auto interchange = [&](std::size_t p, std::size_t q, std::size_t k) {
    if (p == q) return;
    s.row(p).swap(s.row(q));
    s.col(p).swap(s.col(q));
    if (k > 0) {
      out.lower.row(p).head(k).swap(out.lower.row(q).head(k));
    }
    std::swap(out.permutation[p], out.permutation[q]);
  };

  std::size_t k = 0;
  while (k < n) {
    const std::size_t rest = n - k - 1;
    const double absakk = std::abs(s(k, k));
    double colmax = 0.0;
    std::size_t imax = k;
    if (rest > 0) {
      Eigen::Index idx = 0;
      colmax = s.col(k).tail(rest).cwiseAbs().maxCoeff(&idx);
      imax = k + 1 + static_cast<std::size_t>(idx);
    }

    if (std::max(absakk, colmax) <= tol) {
      // Negligible column: record a (near) zero pivot without elimination.
      out.diagonal(k, k) = s(k, k);
      out.block_size[k] = 1;
      count(out.inertia, s(k, k), tol);
      ++k;
      continue;
    }

    std::size_t pivot = k;
    int step = 1;
    if (absakk < alpha * colmax) {
      double rowmax = 0.0;
      for (std::size_t j = k; j < n; ++j) {
        if (j != imax) rowmax = std::max(rowmax, std::abs(s(imax, j)));
      }
      if (absakk * rowmax >= alpha * colmax * colmax) {
        pivot = k;
      } else if (std::abs(s(imax, imax)) >= alpha * rowmax) {
        pivot = imax;
      } else {
        pivot = imax;
        step = 2;
      }
    }

    if (step == 1) {
      interchange(k, pivot, k);
      const double d = s(k, k);
      out.diagonal(k, k) = d;
      out.block_size[k] = 1;
      count(out.inertia, d, tol);
      if (rest > 0) {
        const Vector l = s.col(k).tail(rest) / d;
        s.bottomRightCorner(rest, rest).noalias() -= d * l * l.transpose();
        out.lower.col(k).tail(rest) = l;
      }
      ++k;
    } else {
      interchange(k + 1, pivot, k);
      const Eigen::Matrix2d block = s.block<2, 2>(k, k);
      out.diagonal.block<2, 2>(k, k) = block;
      out.block_size[k] = 2;
      out.block_size[k + 1] = 0;
      const auto [e1, e2] = eigenvalues_2x2(block(0, 0), block(0, 1), block(1, 1));
      count(out.inertia, e1, tol);
      count(out.inertia, e2, tol);
      const std::size_t tail = n - k - 2;
      if (tail > 0) {
        const Matrix c = s.block(k + 2, k, tail, 2);
        const Matrix l = c * block.inverse();
        s.bottomRightCorner(tail, tail).noalias() -= l * c.transpose();
        out.lower.block(k + 2, k, tail, 2) = l;
      }
      k += 2;
    }
  }
  return out;
}

Vector LdltFactors::solve(const Vector& b) const {
  const std::size_t n = dimension();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[permutation[i]];
  // L z = y
  const auto l = lower.triangularView<Eigen::UnitLower>();
  l.solveInPlace(y);
  // D w = z
  for (std::size_t k = 0; k < n;) {
    if (block_size[k] == 2) {
      const Eigen::Matrix2d block = diagonal.block<2, 2>(k, k);
      const Eigen::Vector2d rhs = y.segment<2>(k);
      y.segment<2>(k) = block.inverse() * rhs;
      k += 2;
    } else {
      const double d = diagonal(k, k);
      y[k] = std::abs(d) > zero_tolerance && d != 0.0 ? y[k] / d : 0.0;
      ++k;
    }
  }
  // Lᵀ v = w
  lower.transpose().triangularView<Eigen::UnitUpper>().solveInPlace(y);
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[permutation[i]] = y[i];
  return x;
}

Matrix LdltFactors::reconstruct() const {
  const std::size_t n = dimension();
  const Matrix permuted = lower * diagonal * lower.transpose();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(permutation[i], permutation[j]) = permuted(i, j);
    }
  }
  return m;
}

namespace {

std::size_t rank_of(const Eigen::ColPivHouseholderQR<Matrix>& qr,
                    const LinalgConfig& config) {
  const Matrix& r = qr.matrixR();
  const auto diag_len = std::min(r.rows(), r.cols());
  if (diag_len == 0) return 0;
  const double r00 = std::abs(r(0, 0));
  if (r00 == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < diag_len; ++i) {
    if (std::abs(r(i, i)) > config.rank_threshold * r00) ++rank;
  }
  return rank;
}

}  // namespace

Matrix nullspace_basis(const Matrix& a, const LinalgConfig& config) {
  const auto n = a.rows();
  if (a.cols() == 0 || n == 0) return Matrix::Identity(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const auto rank = static_cast<Eigen::Index>(rank_of(qr, config));
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - rank);
}

std::size_t numerical_rank(const Matrix& a, const LinalgConfig& config) {
  if (a.cols() == 0 || a.rows() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  return rank_of(qr, config);
}

std::vector<std::size_t> independent_columns(const Matrix& a,
                                             const LinalgConfig& config) {
  std::vector<std::size_t> cols;
  if (a.cols() == 0 || a.rows() == 0) return cols;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const std::size_t rank = rank_of(qr, config);
  const auto& perm = qr.colsPermutation().indices();
  for (std::size_t i = 0; i < rank; ++i) {
    cols.push_back(static_cast<std::size_t>(perm[static_cast<Eigen::Index>(i)]));
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

Vector least_squares(const Matrix& a, const Vector& b,
                     const LinalgConfig& config) {
  if (a.cols() == 0) return Vector::Zero(0);
  if (a.rows() == 0) return Vector::Zero(a.cols());
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(config.rank_threshold);
  return qr.solve(b);
}

}  // namespace funnel_sqp
