#pragma once

#include <cstddef>
#include <vector>

#include "funnel_sqp/common.hpp"

namespace funnel_sqp {

struct Inertia {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_zero = 0;

  friend bool operator==(const Inertia&, const Inertia&) = default;
};

/// Bunch–Kaufman factors Pᵀ M P = L D Lᵀ of a symmetric matrix.
///
/// `permutation[i]` is the row of M that ends up in position i. D is block
/// diagonal with 1×1 and 2×2 blocks; `block_size[k]` is 1 or 2 at the first
/// index of each block and 0 at the second index of a 2×2 block.
struct LdltFactors {
  std::vector<std::size_t> permutation;
  Matrix lower;     // unit lower triangular
  Matrix diagonal;  // block diagonal D
  std::vector<int> block_size;
  Inertia inertia;
  double zero_tolerance = 0.0;

  std::size_t dimension() const { return permutation.size(); }

  /// Solves M x = b; zero pivots contribute nothing to the solution.
  Vector solve(const Vector& b) const;

  /// Rebuilds P L D Lᵀ Pᵀ.
  Matrix reconstruct() const;
};

struct LinalgConfig {
  /// Pivots with magnitude at most this times ‖M‖∞ count as zero.
  double zero_pivot_threshold = 1e-12;
  /// Columns with |R_ii| at most this times |R_00| are rank deficient.
  double rank_threshold = 1e-10;
};

/// Symmetric indefinite factorization with inertia. The input is symmetrized
/// as (M + Mᵀ)/2 first; factorization never fails.
LdltFactors ldlt_factorize(const Matrix& m, const LinalgConfig& config = {});

/// Orthonormal basis Z of {z : Aᵀz = 0} for an n×m matrix A, computed from a
/// column-pivoted QR factorization of A. Returns n×(n−rank(A)).
Matrix nullspace_basis(const Matrix& a, const LinalgConfig& config = {});

/// Numerical rank of A by column-pivoted QR.
std::size_t numerical_rank(const Matrix& a, const LinalgConfig& config = {});

/// Indices of a maximal linearly independent subset of A's columns, in
/// increasing order.
std::vector<std::size_t> independent_columns(const Matrix& a,
                                             const LinalgConfig& config = {});

/// Minimum-residual solution of A y ≈ b (basic solution for rank-deficient A).
Vector least_squares(const Matrix& a, const Vector& b,
                     const LinalgConfig& config = {});

}  // namespace funnel_sqp
