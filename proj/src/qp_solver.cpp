#include "funnel_sqp/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace funnel_sqp {

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

void QpData::validate() const {
  const auto n = gradient.size();
  const auto m = constant.size();
  if (hessian.rows() != n || hessian.cols() != n || jacobian.rows() != n ||
      jacobian.cols() != m || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("QpData: inconsistent dimensions");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) {
      throw std::invalid_argument("QpData: lower bound above upper bound at " +
                                  std::to_string(i));
    }
  }
}

namespace {

template <typename Derived>
double inf_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::vector<std::size_t> free_indices(const ActiveSet& working) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < working.size(); ++i) {
    if (working[i] == BoundState::Free) free.push_back(i);
  }
  return free;
}

Matrix select_rows(const Matrix& a, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = a.row(rows[k]);
  return out;
}

Matrix select_cols(const Matrix& a, const std::vector<std::size_t>& cols) {
  Matrix out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(k) = a.col(cols[k]);
  return out;
}

Matrix principal_block(const Matrix& w, const std::vector<std::size_t>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = w(idx[i], idx[j]);
  }
  return out;
}

Vector gather(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

bool has_full_column_rank(const Matrix& a_free, std::size_t m,
                          const LinalgConfig& linalg) {
  if (m == 0) return true;
  if (static_cast<std::size_t>(a_free.rows()) < m) return false;
  return numerical_rank(a_free, linalg) == m;
}

// Fixes every variable sitting on a bound, skipping those whose bound would
// make the working set linearly dependent on the equality rows.
ActiveSet initial_working_set(const QpData& qp, const Vector& d,
                              const Matrix& a_eq, const LinalgConfig& linalg) {
  const std::size_t n = qp.n_vars();
  const auto m = static_cast<std::size_t>(a_eq.cols());
  ActiveSet working(n, BoundState::Free);
  for (std::size_t i = 0; i < n; ++i) {
    BoundState state = BoundState::Free;
    if (d[i] == qp.lower[i]) {
      state = BoundState::AtLower;
    } else if (d[i] == qp.upper[i]) {
      state = BoundState::AtUpper;
    }
    if (state == BoundState::Free) continue;
    working[i] = state;
    if (m > 0 && !has_full_column_rank(select_rows(a_eq, free_indices(working)),
                                       m, linalg)) {
      working[i] = BoundState::Free;
    }
  }
  return working;
}

struct FaceSolution {
  Vector d;
  bool ok = false;
};

// Minimizes the QP over the affine face defined by `working` (fixed variables
// at their bounds, equality rows active), ignoring the remaining bounds.
// Fails when the face is inconsistent, the reduced Hessian is indefinite, or
// the objective is unbounded along the face.
FaceSolution solve_on_face(const QpData& qp, const Matrix& a_eq,
                           const Vector& b_eq, const ActiveSet& working,
                           const QpSolverConfig& config) {
  const std::size_t n = qp.n_vars();
  FaceSolution out;
  Vector d = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (working[i] == BoundState::AtLower) d[i] = qp.lower[i];
    if (working[i] == BoundState::AtUpper) d[i] = qp.upper[i];
    if (!std::isfinite(d[i])) return out;
  }
  const auto free = free_indices(working);
  const Matrix a_free = select_rows(a_eq, free);
  const double scale = 1.0 + inf_norm(b_eq) + inf_norm(a_eq) * inf_norm(d);

  if (a_eq.cols() > 0) {
    const Vector rhs = -(a_eq.transpose() * d + b_eq);
    if (free.empty()) {
      if (inf_norm(rhs) > 1e-9 * scale) return out;
    } else {
      const Vector d0 = least_squares(a_free.transpose(), rhs, config.linalg);
      if (inf_norm(a_free.transpose() * d0 - rhs) > 1e-9 * scale) return out;
      for (std::size_t k = 0; k < free.size(); ++k) d[free[k]] = d0[k];
    }
  }
  if (!free.empty()) {
    const Matrix z = nullspace_basis(a_free, config.linalg);
    if (z.cols() > 0) {
      const Vector grad = gather(qp.hessian * d + qp.gradient, free);
      const Matrix h = z.transpose() * principal_block(qp.hessian, free) * z;
      const Vector rg = z.transpose() * grad;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
      const double ctol = config.curvature_tolerance * (1.0 + inf_norm(qp.hessian));
      const double gtol = 1e-9 * (1.0 + inf_norm(grad));
      const Vector r = eig.eigenvectors().transpose() * rg;
      Vector y = Vector::Zero(h.rows());
      for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double lam = eig.eigenvalues()[i];
        if (lam < -ctol) return out;
        if (lam <= ctol) {
          if (std::abs(r[i]) > gtol) return out;
          continue;
        }
        y[i] = -r[i] / lam;
      }
      const Vector step = z * (eig.eigenvectors() * y);
      for (std::size_t k = 0; k < free.size(); ++k) d[free[k]] += step[k];
    }
  }
  out.d = std::move(d);
  out.ok = true;
  return out;
}

bool within_bounds(const QpData& qp, const Vector& d, double tol) {
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double slack = tol * (1.0 + std::abs(d[i]));
    if (d[i] < qp.lower[i] - slack || d[i] > qp.upper[i] + slack) return false;
  }
  return true;
}

}  // namespace

QpSolution QpSolver::run(const QpData& qp, const std::vector<std::size_t>& eq_rows,
                         Vector d, ActiveSet working, std::size_t pivot_budget) {
  const std::size_t n = qp.n_vars();
  const Matrix a_eq = select_cols(qp.jacobian, eq_rows);
  const Vector b_eq = gather(qp.constant, eq_rows);
  const auto m = static_cast<std::size_t>(a_eq.cols());

  const double w_norm = inf_norm(qp.hessian);
  const double g_norm = inf_norm(qp.gradient);
  const double ctol = config_.curvature_tolerance * (1.0 + w_norm);

  for (std::size_t i = 0; i < n; ++i) {
    if (qp.lower[i] == qp.upper[i]) {
      d[i] = qp.lower[i];
      if (working[i] == BoundState::Free) working[i] = BoundState::AtLower;
    }
  }

  QpSolution sol;
  std::size_t iterations = 0;
  const std::size_t cap = pivot_budget;
  for (;;) {
    if (iterations++ > cap) {
      throw MaxPivots("active-set QP exceeded " + std::to_string(cap) +
                      " iterations");
    }
    const bool bland = iterations > cap / 2;
    const auto free = free_indices(working);
    const Vector grad = qp.hessian * d + qp.gradient;
    const double grad_scale = 1.0 + g_norm + w_norm * inf_norm(d);
    const Matrix a_free = select_rows(a_eq, free);

    Matrix z;
    if (!free.empty()) {
      z = nullspace_basis(a_free, config_.linalg);
    }
    const auto nz = z.cols();

    Vector direction = Vector::Zero(static_cast<Eigen::Index>(n));
    bool have_direction = false;
    bool ray = false;  // step length unbounded above by the model
    if (nz > 0) {
      const Vector grad_free = gather(grad, free);
      const Vector rg = z.transpose() * grad_free;
      const Matrix h = z.transpose() * principal_block(qp.hessian, free) * z;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
      const Vector& lam = eig.eigenvalues();
      const Matrix& q = eig.eigenvectors();
      const Vector r = q.transpose() * rg;
      const bool stationary =
          inf_norm(rg) <= config_.stationarity_tolerance * grad_scale;

      Vector pz;
      if (lam[0] < -ctol) {
        pz = q.col(0);
        const double slope = pz.dot(rg);
        if (slope > 0.0 || (slope == 0.0 && stationary)) {
          // Prefer descent; at a stationary point orient the largest entry
          // of the full-space direction positively for determinism.
          if (slope > 0.0) {
            pz = -pz;
          } else {
            const Vector full = z * pz;
            Eigen::Index arg = 0;
            full.cwiseAbs().maxCoeff(&arg);
            if (full[arg] < 0.0) pz = -pz;
          }
        }
        ray = true;
        have_direction = true;
      } else if (!stationary) {
        Vector zero_part = Vector::Zero(h.rows());
        Vector newton = Vector::Zero(h.rows());
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
          if (lam[i] <= ctol) {
            zero_part += r[i] * q.col(i);
          } else {
            newton -= (r[i] / lam[i]) * q.col(i);
          }
        }
        if (inf_norm(zero_part) > config_.stationarity_tolerance * grad_scale) {
          pz = -zero_part;
          ray = true;
        } else {
          pz = newton;
        }
        have_direction = inf_norm(pz) > 0.0;
      }
      if (have_direction) {
        const Vector pf = z * pz;
        for (std::size_t k = 0; k < free.size(); ++k) direction[free[k]] = pf[k];
      }
    }

    if (have_direction) {
      // Ratio test over free variables.
      const double p_norm = inf_norm(direction);
      double alpha_min = kInf;
      for (std::size_t i : free) {
        const double p = direction[i];
        if (std::abs(p) <= 1e-14 * p_norm) continue;
        double limit = kInf;
        if (p < 0.0 && std::isfinite(qp.lower[i])) {
          limit = (qp.lower[i] - d[i]) / p;
        } else if (p > 0.0 && std::isfinite(qp.upper[i])) {
          limit = (qp.upper[i] - d[i]) / p;
        }
        alpha_min = std::min(alpha_min, std::max(limit, 0.0));
      }
      const double alpha_model = ray ? kInf : 1.0;
      if (alpha_min >= alpha_model) {
        if (ray) {
          sol.status = QpStatus::Unbounded;
          sol.d = d;
          sol.active_set = working;
          sol.objective = -kInf;
          sol.lambda = Vector::Zero(qp.constant.size());
          sol.mu = Vector::Zero(static_cast<Eigen::Index>(n));
          return sol;
        }
        d += direction;
        continue;
      }

      // Candidates tied with the minimum ratio; pick the largest pivot, then
      // the lowest index (lowest index only once anti-cycling is engaged).
      const double window = config_.ratio_tie_tolerance * std::max(1.0, alpha_min);
      std::size_t chosen = n;
      double best_pivot = 0.0;
      for (std::size_t i : free) {
        const double p = direction[i];
        if (std::abs(p) <= 1e-14 * p_norm) continue;
        double limit = kInf;
        if (p < 0.0 && std::isfinite(qp.lower[i])) {
          limit = (qp.lower[i] - d[i]) / p;
        } else if (p > 0.0 && std::isfinite(qp.upper[i])) {
          limit = (qp.upper[i] - d[i]) / p;
        }
        if (std::max(limit, 0.0) > alpha_min + window) continue;
        if (chosen == n) {
          chosen = i;
          best_pivot = std::abs(p);
          if (bland) break;
        } else if (std::abs(p) > best_pivot * (1.0 + 1e-9)) {
          chosen = i;
          best_pivot = std::abs(p);
        }
      }
      d += alpha_min * direction;
      working[chosen] =
          direction[chosen] < 0.0 ? BoundState::AtLower : BoundState::AtUpper;
      d[chosen] = working[chosen] == BoundState::AtLower ? qp.lower[chosen]
                                                          : qp.upper[chosen];
      for (std::size_t i : free) d[i] = std::clamp(d[i], qp.lower[i], qp.upper[i]);
      ++sol.pivots;
      continue;
    }

    // Stationary on the current face with a positive semidefinite reduced
    // Hessian: compute multipliers and release a bound with the wrong sign.
    const Vector grad_free = gather(grad, free);
    Vector lambda = Vector::Zero(static_cast<Eigen::Index>(m));
    if (m > 0 && !free.empty()) {
      lambda = least_squares(a_free, grad_free, config_.linalg);
    }
    Vector mu = grad;
    if (m > 0) mu.noalias() -= a_eq * lambda;
    const double mtol = config_.multiplier_tolerance * grad_scale;
    std::size_t drop = n;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (working[i] == BoundState::Free) {
        mu[i] = 0.0;
        continue;
      }
      if (qp.lower[i] == qp.upper[i]) continue;
      const double violation =
          working[i] == BoundState::AtLower ? -mu[i] : mu[i];
      if (violation > mtol) {
        if (drop == n || (!bland && violation > worst)) {
          drop = i;
          worst = violation;
        }
      }
    }
    if (drop != n) {
      working[drop] = BoundState::Free;
      ++sol.pivots;
      continue;
    }

    // Optimal. Remove the drift accumulated by snapping to bounds.
    if (m > 0 && !free.empty()) {
      const Vector residual = a_eq.transpose() * d + b_eq;
      if (inf_norm(residual) > 0.0) {
        const Vector corr =
            least_squares(a_free.transpose(), -residual, config_.linalg);
        for (std::size_t k = 0; k < free.size(); ++k) {
          const std::size_t i = free[k];
          d[i] = std::clamp(d[i] + corr[k], qp.lower[i], qp.upper[i]);
        }
        const Vector g2 = qp.hessian * d + qp.gradient;
        lambda = least_squares(a_free, gather(g2, free), config_.linalg);
        mu = g2 - a_eq * lambda;
        for (std::size_t i : free) mu[i] = 0.0;
      }
    }
    sol.status = QpStatus::Optimal;
    sol.d = d;
    sol.lambda = Vector::Zero(qp.constant.size());
    for (std::size_t k = 0; k < eq_rows.size(); ++k) sol.lambda[eq_rows[k]] = lambda[k];
    sol.mu = mu;
    sol.active_set = working;
    sol.objective = qp.objective(d);
    return sol;
  }
}

std::optional<QpSolution> QpSolver::try_warm_start(
    const QpData& qp, const std::vector<std::size_t>& eq_rows,
    const ActiveSet& warm) {
  if (warm.size() != qp.n_vars()) return std::nullopt;
  const Matrix a_eq = select_cols(qp.jacobian, eq_rows);
  const Vector b_eq = gather(qp.constant, eq_rows);
  ActiveSet working = warm;
  // Drop bounds that would make the working set dependent.
  for (std::size_t i = 0; i < working.size(); ++i) {
    if (working[i] == BoundState::Free) continue;
    if (!has_full_column_rank(select_rows(a_eq, free_indices(working)),
                              eq_rows.size(), config_.linalg)) {
      working[i] = BoundState::Free;
    }
  }
  const FaceSolution face = solve_on_face(qp, a_eq, b_eq, working, config_);
  if (!face.ok || !within_bounds(qp, face.d, 1e-12)) return std::nullopt;
  Vector d = face.d.cwiseMax(qp.lower).cwiseMin(qp.upper);
  const std::size_t budget = config_.pivot_factor * (qp.n_vars() + qp.n_eq()) + 10;
  return run(qp, eq_rows, std::move(d), std::move(working), budget);
}

std::optional<std::pair<Vector, ActiveSet>> QpSolver::global_face_search(
    const QpData& qp, const std::vector<std::size_t>& eq_rows) {
  const std::size_t n = qp.n_vars();
  const Matrix a_eq = select_cols(qp.jacobian, eq_rows);
  const Vector b_eq = gather(qp.constant, eq_rows);
  std::optional<std::pair<Vector, ActiveSet>> best;
  double best_value = kInf;

  ActiveSet face(n, BoundState::Free);
  auto valid_state = [&](std::size_t i, BoundState s) {
    switch (s) {
      case BoundState::Free: return qp.lower[i] != qp.upper[i];
      case BoundState::AtLower: return std::isfinite(qp.lower[i]);
      case BoundState::AtUpper:
        return std::isfinite(qp.upper[i]) && qp.lower[i] != qp.upper[i];
    }
    return false;
  };
  // Odometer over {Free, AtLower, AtUpper}^n.
  std::vector<int> digit(n, 0);
  for (;;) {
    bool valid = true;
    for (std::size_t i = 0; i < n && valid; ++i) {
      face[i] = static_cast<BoundState>(digit[i]);
      valid = valid_state(i, face[i]);
    }
    if (valid) {
      const FaceSolution sol = solve_on_face(qp, a_eq, b_eq, face, config_);
      if (sol.ok && within_bounds(qp, sol.d, 1e-10)) {
        const Vector d = sol.d.cwiseMax(qp.lower).cwiseMin(qp.upper);
        const double value = qp.objective(d);
        if (value < best_value - 1e-12 * (1.0 + std::abs(value))) {
          best_value = value;
          best = std::make_pair(d, face);
        }
      }
    }
    std::size_t pos = 0;
    while (pos < n && ++digit[pos] == 3) digit[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

QpSolution QpSolver::solve(const QpData& qp,
                           const std::optional<ActiveSet>& warm_start) {
  qp.validate();
  const std::size_t n = qp.n_vars();
  const std::size_t m = qp.n_eq();
  const std::vector<std::size_t> eq_rows =
      independent_columns(qp.jacobian, config_.linalg);
  const std::size_t budget = config_.pivot_factor * (n + m) + 10;

  std::optional<QpSolution> result;
  if (warm_start) {
    result = try_warm_start(qp, eq_rows, *warm_start);
  }

  if (!result) {
    Vector d = Vector::Zero(static_cast<Eigen::Index>(n))
                   .cwiseMax(qp.lower)
                   .cwiseMin(qp.upper);
    double residual = 0.0;
    if (m > 0) {
      const Vector r = qp.jacobian.transpose() * d + qp.constant;
      if (r.lpNorm<1>() > 0.0) {
        const Phase1Result p1 =
            phase1_start(qp.jacobian, qp.constant, qp.lower, qp.upper, config_);
        d = p1.d;
        residual = p1.residual;
      }
    }
    if (residual > config_.feasibility_tolerance * (1.0 + inf_norm(qp.constant))) {
      QpSolution infeasible;
      infeasible.status = QpStatus::Infeasible;
      infeasible.d = d;
      infeasible.lambda = Vector::Zero(static_cast<Eigen::Index>(m));
      infeasible.mu = Vector::Zero(static_cast<Eigen::Index>(n));
      infeasible.objective = qp.objective(d);
      infeasible.active_set.assign(n, BoundState::Free);
      infeasible.phase1_residual = residual;
      return infeasible;
    }
    const Matrix a_eq = select_cols(qp.jacobian, eq_rows);
    ActiveSet working = initial_working_set(qp, d, a_eq, config_.linalg);
    try {
      result = run(qp, eq_rows, d, std::move(working), budget);
    } catch (const MaxPivots&) {
      if (n > config_.global_search_max_vars) throw;
    }
    if (result) result->phase1_residual = residual;
  }

  // Indefinite on the equality null space: an active-set point is only a
  // local minimizer, so small problems are finished by face enumeration.
  if (n <= config_.global_search_max_vars &&
      (!result || result->status == QpStatus::Optimal)) {
    const Matrix z = nullspace_basis(select_cols(qp.jacobian, eq_rows), config_.linalg);
    bool indefinite = false;
    if (z.cols() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(z.transpose() * qp.hessian * z,
                                                Eigen::EigenvaluesOnly);
      indefinite = eig.eigenvalues()[0] <
                   -config_.curvature_tolerance * (1.0 + inf_norm(qp.hessian));
    }
    if (indefinite || !result) {
      auto best = global_face_search(qp, eq_rows);
      if (best && (!result || qp.objective(best->first) <
                                  result->objective -
                                      1e-12 * (1.0 + std::abs(result->objective)))) {
        const double residual = result ? result->phase1_residual : 0.0;
        const std::size_t pivots = result ? result->pivots : 0;
        const Matrix a_eq = select_cols(qp.jacobian, eq_rows);
        ActiveSet working = best->second;
        for (std::size_t i = 0; i < n; ++i) {
          if (working[i] == BoundState::Free) continue;
          if (!has_full_column_rank(select_rows(a_eq, free_indices(working)),
                                    eq_rows.size(), config_.linalg)) {
            working[i] = BoundState::Free;
          }
        }
        result = run(qp, eq_rows, best->first, std::move(working), budget);
        result->phase1_residual = residual;
        result->pivots += pivots;
      }
    }
  }
  if (!result) {
    throw MaxPivots("active-set QP failed to converge");
  }
  return *result;
}

QpSolution QpSolver::solve_from_feasible(const QpData& qp, const Vector& start) {
  qp.validate();
  const std::vector<std::size_t> eq_rows =
      independent_columns(qp.jacobian, config_.linalg);
  const Vector d = start.cwiseMax(qp.lower).cwiseMin(qp.upper);
  const Matrix a_eq = select_cols(qp.jacobian, eq_rows);
  ActiveSet working = initial_working_set(qp, d, a_eq, config_.linalg);
  const std::size_t budget = config_.pivot_factor * (qp.n_vars() + qp.n_eq()) + 10;
  return run(qp, eq_rows, d, std::move(working), budget);
}

Phase1Result phase1_start(const Matrix& a, const Vector& b, const Vector& lb,
                          const Vector& ub, const QpSolverConfig& config) {
  const auto n = a.rows();
  const auto m = a.cols();
  Phase1Result out;
  out.d = Vector::Zero(n).cwiseMax(lb).cwiseMin(ub);
  if (m == 0) return out;

  QpData lp;
  const auto total = n + 2 * m;
  lp.hessian = Matrix::Zero(total, total);
  lp.gradient = Vector::Zero(total);
  lp.gradient.tail(2 * m).setOnes();
  lp.jacobian = Matrix::Zero(total, m);
  lp.jacobian.topRows(n) = a;
  lp.jacobian.middleRows(n, m) = -Matrix::Identity(m, m);
  lp.jacobian.bottomRows(m) = Matrix::Identity(m, m);
  lp.constant = b;
  lp.lower = Vector::Zero(total);
  lp.upper = Vector::Constant(total, kInf);
  lp.lower.head(n) = lb;
  lp.upper.head(n) = ub;

  const Vector r = a.transpose() * out.d + b;
  Vector start(total);
  start.head(n) = out.d;
  start.segment(n, m) = r.cwiseMax(0.0);
  start.tail(m) = (-r).cwiseMax(0.0);

  QpSolverConfig lp_config = config;
  lp_config.global_search_max_vars = 0;
  QpSolver solver(lp_config);
  const QpSolution sol = solver.solve_from_feasible(lp, start);
  out.d = sol.d.head(n);
  out.residual = (a.transpose() * out.d + b).lpNorm<1>();
  return out;
}

QpSolution solve_qp(const QpData& qp, const std::optional<ActiveSet>& warm_start) {
  QpSolver solver;
  return solver.solve(qp, warm_start);
}

}  // namespace funnel_sqp
