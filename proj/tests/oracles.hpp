// Independent reference implementations used only by the tests.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Cyclic Jacobi rotations on a symmetric matrix; returns the eigenvalues.
inline Vector jacobi_eigenvalues(Matrix a, int sweeps = 100) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  return a.diagonal();
}

struct Qp {
  Matrix w;
  Vector g;
  Matrix a;  // n x m
  Vector b;
  Vector lb;
  Vector ub;
  double objective(const Vector& d) const { return 0.5 * d.dot(w * d) + g.dot(d); }
};

// Minimum over all 3^n faces of the equality-constrained KKT solutions that
// are feasible. Exact for convex QPs with finite bounds.
inline double enumerate_active_sets(const Qp& qp) {
  const auto n = qp.g.size();
  const auto m = qp.b.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(n, 0);
  for (;;) {
    std::vector<Eigen::Index> free;
    Vector fixed = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[i] == 0) free.push_back(i);
      if (state[i] == 1) fixed[i] = qp.lb[i];
      if (state[i] == 2) fixed[i] = qp.ub[i];
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Matrix kkt = Matrix::Zero(nf + m, nf + m);
    Vector rhs(nf + m);
    const Vector gfix = qp.w * fixed + qp.g;
    for (Eigen::Index i = 0; i < nf; ++i) {
      for (Eigen::Index j = 0; j < nf; ++j) kkt(i, j) = qp.w(free[i], free[j]);
      for (Eigen::Index j = 0; j < m; ++j) {
        kkt(i, nf + j) = qp.a(free[i], j);
        kkt(nf + j, i) = qp.a(free[i], j);
      }
      rhs[i] = -gfix[free[i]];
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      rhs[nf + j] = -(qp.b[j] + qp.a.col(j).dot(fixed));
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    Vector sol = nf + m > 0 ? Vector(lu.solve(rhs)) : Vector(0);
    if (nf + m == 0 || (kkt * sol - rhs).norm() <= 1e-9 * (1.0 + rhs.norm())) {
      Vector d = fixed;
      for (Eigen::Index i = 0; i < nf; ++i) d[free[i]] = sol[i];
      bool feasible = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d[i] < qp.lb[i] - 1e-9 || d[i] > qp.ub[i] + 1e-9) feasible = false;
      }
      for (Eigen::Index j = 0; j < m; ++j) {
        if (std::abs(qp.a.col(j).dot(d) + qp.b[j]) > 1e-9) feasible = false;
      }
      if (feasible) best = std::min(best, qp.objective(d));
    }
    Eigen::Index pos = 0;
    while (pos < n && ++state[pos] == 3) state[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

// Minimum of the objective over a uniform grid of the box (no equalities).
inline double grid_minimum(const Qp& qp, int points_per_axis) {
  const auto n = qp.g.size();
  std::vector<int> idx(n, 0);
  Vector d(n);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    for (Eigen::Index i = 0; i < n; ++i) {
      d[i] = qp.lb[i] + (qp.ub[i] - qp.lb[i]) * idx[i] / (points_per_axis - 1);
    }
    best = std::min(best, qp.objective(d));
    Eigen::Index pos = 0;
    while (pos < n && ++idx[pos] == points_per_axis) idx[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

inline Qp random_convex_qp(std::mt19937& rng) {
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = dim(rng);
  const int m = std::uniform_int_distribution<int>(0, std::min(2, n))(rng);
  Qp qp;
  Matrix b = Matrix::NullaryExpr(n, n, [&] { return u(rng); });
  qp.w = b.transpose() * b + 0.1 * Matrix::Identity(n, n);
  qp.g = Vector::NullaryExpr(n, [&] { return 5.0 * u(rng); });
  qp.a = Matrix::NullaryExpr(n, m, [&] { return u(rng); });
  qp.lb = Vector::NullaryExpr(n, [&] { return -2.0 + u(rng); });
  qp.ub = Vector::NullaryExpr(n, [&] { return 2.0 + u(rng); });
  Vector inside(n);
  for (int i = 0; i < n; ++i) {
    inside[i] = qp.lb[i] + (qp.ub[i] - qp.lb[i]) * 0.5 * (1.0 + u(rng));
  }
  qp.b = -qp.a.transpose() * inside;
  return qp;
}

inline Qp random_indefinite_box_qp(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = std::uniform_int_distribution<int>(1, 4)(rng);
  Qp qp;
  Matrix r = Matrix::NullaryExpr(n, n, [&] { return 3.0 * u(rng); });
  qp.w = 0.5 * (r + r.transpose());
  qp.g = Vector::NullaryExpr(n, [&] { return 2.0 * u(rng); });
  qp.a = Matrix::Zero(n, 0);
  qp.b = Vector::Zero(0);
  qp.lb = Vector::NullaryExpr(n, [&] { return -1.25 + 0.75 * u(rng); });
  qp.ub = Vector::NullaryExpr(n, [&] { return 1.25 + 0.75 * u(rng); });
  return qp;
}

// Central finite-difference gradient.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

// Central finite-difference Jacobian of a vector function (rows = outputs).
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                          const Vector& x, double h = 1e-6) {
  const Vector f0 = f(x);
  Matrix j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return j;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() /
         std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
}

}  // namespace oracle
