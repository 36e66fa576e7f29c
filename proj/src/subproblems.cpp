#include "funnel_sqp/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace funnel_sqp {

const char* to_string(Phase phase) {
  return phase == Phase::Optimality ? "optimality" : "restoration";
}

namespace {

void step_bounds(const Vector& x, const Vector& lower, const Vector& upper,
                 std::optional<double> radius, Vector& lo, Vector& hi) {
  lo = lower - x;
  hi = upper - x;
  if (radius) {
    lo = lo.cwiseMax(-*radius);
    hi = hi.cwiseMin(*radius);
  }
  // Guard against round-off placing x a hair outside its own bounds.
  lo = lo.cwiseMin(0.0);
  hi = hi.cwiseMax(0.0);
}

}  // namespace

QpData build_optimality_qp(const Iterate& iterate, const Matrix& hessian,
                           const Vector& lower, const Vector& upper,
                           std::optional<double> radius) {
  QpData qp;
  qp.hessian = hessian;
  qp.gradient = iterate.grad_f;
  qp.jacobian = iterate.jac_c;
  qp.constant = iterate.c;
  step_bounds(iterate.x, lower, upper, radius, qp.lower, qp.upper);
  return qp;
}

QpData build_feasibility_qp(const Iterate& iterate, const Matrix& hessian0,
                            const Vector& lower, const Vector& upper,
                            std::optional<double> radius) {
  const auto n = iterate.x.size();
  const auto m = iterate.c.size();
  const auto total = n + 2 * m;
  QpData qp;
  qp.hessian = Matrix::Zero(total, total);
  qp.hessian.topLeftCorner(n, n) = hessian0;
  qp.gradient = Vector::Zero(total);
  qp.gradient.tail(2 * m).setOnes();
  qp.jacobian = Matrix::Zero(total, m);
  qp.jacobian.topRows(n) = iterate.jac_c;
  qp.jacobian.middleRows(n, m) = -Matrix::Identity(m, m);
  qp.jacobian.bottomRows(m) = Matrix::Identity(m, m);
  qp.constant = iterate.c;
  Vector lo, hi;
  step_bounds(iterate.x, lower, upper, radius, lo, hi);
  qp.lower = Vector::Zero(total);
  qp.upper = Vector::Constant(total, kInf);
  qp.lower.head(n) = lo;
  qp.upper.head(n) = hi;
  return qp;
}

Vector feasibility_qp_start(const QpData& fqp, std::size_t n_vars) {
  const auto n = static_cast<Eigen::Index>(n_vars);
  const auto m = fqp.constant.size();
  Vector start(fqp.gradient.size());
  start.head(n) = Vector::Zero(n).cwiseMax(fqp.lower.head(n)).cwiseMin(fqp.upper.head(n));
  const Vector r = fqp.jacobian.topRows(n).transpose() * start.head(n) + fqp.constant;
  start.segment(n, m) = r.cwiseMax(0.0);
  start.tail(m) = (-r).cwiseMax(0.0);
  return start;
}

Convexified convexify(const Matrix& hessian, const Matrix& jacobian,
                      const SubproblemConfig& config, double eta_floor) {
  const auto n = hessian.rows();
  // The KKT matrix [[W + ηI, A], [Aᵀ, 0]] has inertia (n, rank A, 0) exactly
  // when Zᵀ(W + ηI)Z is positive definite. The reduced form is factorized
  // because the KKT form has pivots of size 1/η that a relative zero
  // threshold misreads once η is large.
  const Matrix z = jacobian.cols() > 0 ? nullspace_basis(jacobian)
                                       : Matrix(Matrix::Identity(n, n));
  const Matrix reduced = z.transpose() * hessian * z;
  const auto k = reduced.rows();
  const Inertia target{static_cast<std::size_t>(k), 0, 0};

  auto passes = [&](double eta) {
    return ldlt_factorize(reduced + eta * Matrix::Identity(k, k)).inertia == target;
  };
  if (config.try_zero_shift && eta_floor <= 0.0 && passes(0.0)) {
    return {hessian, 0.0};
  }
  for (double eta = config.eta_initial; eta <= config.eta_max;
       eta *= config.eta_growth) {
    if (eta < eta_floor) continue;
    if (passes(eta)) {
      return {Matrix(hessian + eta * Matrix::Identity(n, n)), eta};
    }
  }
  throw RegularizationFailed("no regularization up to " +
                             std::to_string(config.eta_max) +
                             " makes the reduced Hessian positive definite");
}

void reset_trust_region_multipliers(Vector& mu, const ActiveSet& active,
                                    const Vector& x, const Vector& lower,
                                    const Vector& upper,
                                    std::optional<double> radius) {
  if (!radius) return;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const auto state = active[static_cast<std::size_t>(i)];
    if (state == BoundState::AtLower && -*radius > lower[i] - x[i]) mu[i] = 0.0;
    if (state == BoundState::AtUpper && *radius < upper[i] - x[i]) mu[i] = 0.0;
  }
}

void enter_restoration(Iterate& iterate, PhaseState& phase) {
  phase.phase = Phase::Restoration;
  phase.x_resto = iterate.x;
  phase.h_resto = iterate.h;
  iterate.lambda.setZero();
}

namespace {

// Solves with convexification retries when the QP reports unboundedness.
template <typename Build, typename Solve>
QpSolution solve_convexified(const Matrix& hessian, const Matrix& jacobian,
                             const SubproblemConfig& config, Build build,
                             Solve solve, Matrix& used, double& eta) {
  if (!config.convexify) {
    used = hessian;
    eta = 0.0;
    return solve(build(used));
  }
  double floor = config.try_zero_shift ? 0.0 : config.eta_initial;
  for (;;) {
    Convexified cv = convexify(hessian, jacobian, config, floor);
    used = std::move(cv.hessian);
    eta = cv.eta;
    QpSolution sol = solve(build(used));
    if (sol.status != QpStatus::Unbounded) return sol;
    floor = std::max(config.eta_initial, eta * config.eta_growth);
  }
}

}  // namespace

Direction compute_direction(Iterate& iterate, PhaseState& phase,
                            Evaluator& evaluator, QpSolver& solver,
                            const SubproblemConfig& config,
                            std::optional<double> radius) {
  const NcoProblem& problem = evaluator.problem();
  const auto n = static_cast<Eigen::Index>(problem.n_vars);
  const auto m = static_cast<Eigen::Index>(problem.n_eq);
  Direction dir;

  if (phase.phase == Phase::Optimality) {
    const Matrix w = evaluator.lagrangian_hessian(iterate.x, 1.0, iterate.lambda);
    auto build = [&](const Matrix& h) {
      return build_optimality_qp(iterate, h, problem.lower_bounds,
                                 problem.upper_bounds, radius);
    };
    auto solve = [&](const QpData& qp) { return solver.solve(qp); };
    dir.solution = solve_convexified(w, iterate.jac_c, config, build, solve,
                                     dir.hessian, dir.eta);
    if (dir.solution.status != QpStatus::Infeasible) {
      dir.phase = Phase::Optimality;
      dir.d = dir.solution.d;
      dir.lambda = dir.solution.lambda;
      dir.mu = dir.solution.mu;
      if (dir.solution.status == QpStatus::Optimal) {
        reset_trust_region_multipliers(dir.mu, dir.solution.active_set, iterate.x,
                                       problem.lower_bounds, problem.upper_bounds,
                                       radius);
      }
      return dir;
    }
    enter_restoration(iterate, phase);
    dir.entered_restoration = true;
  }

  const Matrix w0 = evaluator.lagrangian_hessian(iterate.x, 0.0, iterate.lambda);
  QpData fqp;
  auto build = [&](const Matrix& h) {
    fqp = build_feasibility_qp(iterate, h, problem.lower_bounds,
                               problem.upper_bounds, radius);
    return fqp;
  };
  auto solve = [&](const QpData& qp) {
    return solver.solve_from_feasible(qp, feasibility_qp_start(qp, problem.n_vars));
  };
  dir.solution = solve_convexified(w0, Matrix(n, 0), config, build, solve,
                                   dir.hessian, dir.eta);
  dir.phase = Phase::Restoration;
  dir.d = dir.solution.d.head(n);
  dir.lambda = dir.solution.lambda;
  dir.mu = dir.solution.mu.head(n);
  dir.elastic_u = dir.solution.d.segment(n, m);
  dir.elastic_v = dir.solution.d.tail(m);
  if (dir.solution.status == QpStatus::Optimal) {
    ActiveSet x_active(dir.solution.active_set.begin(),
                       dir.solution.active_set.begin() + n);
    reset_trust_region_multipliers(dir.mu, x_active, iterate.x,
                                   problem.lower_bounds, problem.upper_bounds,
                                   radius);
  }
  const double c_norm = iterate.c.size() ? iterate.c.lpNorm<Eigen::Infinity>() : 0.0;
  dir.subproblem_feasible =
      dir.elastic_u.sum() + dir.elastic_v.sum() <=
      config.elastic_tolerance * (1.0 + c_norm);
  return dir;
}

}  // namespace funnel_sqp
