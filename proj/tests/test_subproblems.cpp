#include <gtest/gtest.h>

#include <random>

#include "funnel_sqp/builtin_problems.hpp"
#include "funnel_sqp/subproblems.hpp"

using namespace funnel_sqp;

namespace {

Iterate evaluated(const NcoProblem& p, const Vector& x, const Vector& lambda) {
  Iterate it;
  it.x = x;
  it.lambda = lambda;
  it.mu = Vector::Zero(x.size());
  it.f = p.functions.objective(x);
  it.c = p.functions.constraints(x);
  it.h = infeasibility(it.c);
  it.grad_f = p.functions.objective_gradient(x);
  it.jac_c = p.functions.constraint_jacobian(x);
  return it;
}

// min x² s.t. x + 1 = 0, x ≥ 0: every linearization at x ≥ 0 is infeasible.
NcoProblem shifted_line() {
  NcoProblem p;
  p.name = "shifted-line";
  p.n_vars = 1;
  p.n_eq = 1;
  p.lower_bounds = Vector::Zero(1);
  p.upper_bounds = Vector::Constant(1, kInf);
  p.initial_point = Vector::Zero(1);
  p.initial_multipliers = Vector::Constant(1, 5.0);
  p.initial_bound_multipliers = Vector::Zero(1);
  p.functions.objective = [](const Vector& x) { return x[0] * x[0]; };
  p.functions.objective_gradient = [](const Vector& x) { return Vector(2.0 * x); };
  p.functions.constraints = [](const Vector& x) { return Vector(x.array() + 1.0); };
  p.functions.constraint_jacobian = [](const Vector&) { return Matrix(Matrix::Ones(1, 1)); };
  p.functions.lagrangian_hessian = [](const Vector&, double rho, const Vector&) {
    return Matrix(Matrix::Constant(1, 1, 2.0 * rho));
  };
  return p;
}

}  // namespace

TEST(OptimalityQp, TrustRegionBox) {
  const NcoProblem p = builtin("maratos-fletcher");
  const Iterate it = evaluated(p, p.initial_point, p.initial_multipliers);
  const QpData qp = build_optimality_qp(it, Matrix::Identity(2, 2), p.lower_bounds,
                                        p.upper_bounds, 10.0);
  EXPECT_EQ(qp.lower, Vector::Constant(2, -10.0));
  EXPECT_EQ(qp.upper, Vector::Constant(2, 10.0));
  EXPECT_EQ(qp.gradient, it.grad_f);
  EXPECT_EQ(qp.constant, it.c);
}

TEST(OptimalityQp, IntersectsWithVariableBounds) {
  const NcoProblem p = builtin("bounded-lp-like");
  const Iterate it = evaluated(p, Vector::Zero(2), Vector::Zero(1));
  const QpData qp = build_optimality_qp(it, Matrix::Zero(2, 2), p.lower_bounds,
                                        p.upper_bounds, 0.25);
  EXPECT_EQ(qp.lower, Vector::Zero(2));
  EXPECT_EQ(qp.upper, Vector::Constant(2, 0.25));
  const QpData free = build_optimality_qp(it, Matrix::Zero(2, 2), p.lower_bounds,
                                          p.upper_bounds, std::nullopt);
  EXPECT_EQ(free.lower, p.lower_bounds - it.x);
  EXPECT_EQ(free.upper, p.upper_bounds - it.x);
}

TEST(FeasibilityQp, ElasticsAbsorbResidual) {
  Iterate it;
  it.x = Vector::Zero(1);
  it.c = Vector::Constant(1, 1.0);
  it.h = 1.0;
  it.grad_f = Vector::Zero(1);
  it.jac_c = Matrix::Zero(1, 1);
  const QpData fqp = build_feasibility_qp(it, Matrix::Zero(1, 1), Vector::Constant(1, -kInf),
                                          Vector::Constant(1, kInf), 1.0);
  ASSERT_EQ(fqp.n_vars(), 3u);
  QpSolver solver;
  const auto sol = solver.solve_from_feasible(fqp, feasibility_qp_start(fqp, 1));
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
  EXPECT_NEAR(sol.d[1] + sol.d[2], 1.0, 1e-12);
}

TEST(FeasibilityQp, ConsistentLinearizationHasZeroElastics) {
  const NcoProblem p = builtin("circle");
  const Iterate it = evaluated(p, Vector::Constant(2, 0.5), Vector::Zero(1));
  const QpData fqp = build_feasibility_qp(it, 2.0 * Matrix::Identity(2, 2), p.lower_bounds,
                                          p.upper_bounds, 1.0);
  QpSolver solver;
  const auto sol = solver.solve_from_feasible(fqp, feasibility_qp_start(fqp, 2));
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 0.0, 1e-14);
  EXPECT_LE(sol.d.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FeasibilityQp, InconsistentRowsUseMinimalElastics) {
  Iterate it;
  it.x = Vector::Zero(2);
  it.c = (Vector(2) << 0.0, -1.0).finished();
  it.h = 1.0;
  it.grad_f = Vector::Zero(2);
  it.jac_c = Matrix::Ones(2, 2);  // d1 + d2 = 0 and d1 + d2 = 1
  const QpData fqp = build_feasibility_qp(it, Matrix::Zero(2, 2), Vector::Constant(2, -kInf),
                                          Vector::Constant(2, kInf), 10.0);
  QpSolver solver;
  const auto sol = solver.solve_from_feasible(fqp, feasibility_qp_start(fqp, 2));
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
  const auto p1 = phase1_start(it.jac_c, it.c, Vector::Constant(2, -kInf),
                               Vector::Constant(2, kInf));
  EXPECT_NEAR(p1.residual, sol.objective, 1e-12);
}

TEST(FeasibilityQp, AlwaysOptimalOnRandomData) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  QpSolver solver;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    const Eigen::Index m = 1 + trial % 3;
    Iterate it;
    it.x = Vector::Zero(n);
    it.c = Vector::NullaryExpr(m, [&] { return u(rng); });
    it.h = infeasibility(it.c);
    it.grad_f = Vector::Zero(n);
    it.jac_c = Matrix::NullaryExpr(n, m, [&] { return u(rng); });
    Matrix b = Matrix::NullaryExpr(n, n, [&] { return u(rng); });
    const Matrix w0 = b.transpose() * b;
    const QpData fqp = build_feasibility_qp(it, w0, Vector::Constant(n, -1.0),
                                            Vector::Constant(n, 1.0), 0.5);
    const auto sol = solver.solve_from_feasible(fqp, feasibility_qp_start(fqp, n));
    EXPECT_EQ(sol.status, QpStatus::Optimal);
    // never worse than the elastic start d = 0
    EXPECT_LE(sol.objective, it.h + 1e-12);
  }
}

TEST(Convexify, AlreadyConvexOnNullSpace) {
  const auto r = convexify(2.0 * Matrix::Identity(2, 2), Matrix::Ones(2, 1), {});
  EXPECT_EQ(r.eta, 0.0);
}

TEST(Convexify, LadderForNegativeDefinite) {
  const auto r = convexify(-Matrix::Identity(2, 2), Matrix::Zero(2, 0), {});
  EXPECT_DOUBLE_EQ(r.eta, 10.0);
  EXPECT_EQ(r.hessian, 9.0 * Matrix::Identity(2, 2));
}

TEST(Convexify, IndefiniteButConvexOnNullSpace) {
  // diag(1, −1) restricted to null((0,1)ᵀ) = span(e₁) is positive
  Matrix w(2, 2);
  w << 1, 0, 0, -1;
  Matrix a(2, 1);
  a << 0, 1;
  EXPECT_EQ(convexify(w, a, {}).eta, 0.0);
}

TEST(Convexify, FloorAndFailure) {
  SubproblemConfig cfg;
  cfg.try_zero_shift = false;
  EXPECT_DOUBLE_EQ(convexify(Matrix::Identity(2, 2), Matrix::Zero(2, 0), cfg).eta, 1e-4);
  EXPECT_DOUBLE_EQ(convexify(Matrix::Identity(2, 2), Matrix::Zero(2, 0), {}, 0.05).eta, 0.1);
  cfg.eta_max = 1.0;
  EXPECT_THROW(convexify(-100.0 * Matrix::Identity(2, 2), Matrix::Zero(2, 0), cfg),
               RegularizationFailed);
}

TEST(Convexify, MinimalLadderValue) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    Matrix b = Matrix::NullaryExpr(n, n, [&] { return u(rng); });
    const Matrix w = 0.5 * (b + b.transpose());
    const auto r = convexify(w, Matrix::Zero(n, 0), {});
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(w).eigenvalues().minCoeff();
    EXPECT_GT(lmin + r.eta, 0.0);
    if (r.eta > 1e-4) EXPECT_LE(lmin + r.eta / 10.0, 1e-9 * (1 + w.norm()));
  }
}

TEST(Direction, FeasibleLinearizationKeepsPhase) {
  const NcoProblem p = builtin("circle");
  Iterate it = evaluated(p, Vector::Zero(2), Vector::Zero(1));
  PhaseState phase;
  Evaluator eval(p);
  QpSolver solver;
  const Direction dir = compute_direction(it, phase, eval, solver, {}, 10.0);
  EXPECT_EQ(phase.phase, Phase::Optimality);
  EXPECT_FALSE(dir.entered_restoration);
  EXPECT_NEAR(dir.d[0], 0.5, 1e-12);
  EXPECT_NEAR(dir.d[1], 0.5, 1e-12);
  EXPECT_NEAR(dir.lambda[0], 1.0, 1e-12);
}

TEST(Direction, InfeasibleQpEntersRestoration) {
  const NcoProblem p = shifted_line();
  Iterate it = evaluated(p, Vector::Zero(1), p.initial_multipliers);
  PhaseState phase;
  Evaluator eval(p);
  QpSolver solver;
  const Direction dir = compute_direction(it, phase, eval, solver, {}, 0.5);
  EXPECT_TRUE(dir.entered_restoration);
  EXPECT_EQ(phase.phase, Phase::Restoration);
  EXPECT_EQ(it.lambda[0], 0.0);
  EXPECT_EQ(phase.x_resto, it.x);
  EXPECT_EQ(phase.h_resto, 1.0);
  EXPECT_FALSE(dir.subproblem_feasible);
  EXPECT_EQ(dir.d[0], 0.0);
}

TEST(Direction, ConvexifiedLineSearchQpIsNeverUnbounded) {
  const NcoProblem p = builtin("unbounded-quartic");
  SubproblemConfig cfg;
  cfg.convexify = true;
  Evaluator eval(p);
  QpSolver solver;
  for (double x1 : {0.5, 1.0, 3.0, -2.0}) {
    Iterate it = evaluated(p, (Vector(2) << x1, 1.0).finished(), Vector::Zero(1));
    PhaseState phase;
    const Direction dir = compute_direction(it, phase, eval, solver, cfg, std::nullopt);
    EXPECT_NE(dir.solution.status, QpStatus::Unbounded);
    EXPECT_GT(dir.eta, 0.0);
  }
}

TEST(TrustRegionMultipliers, ResetOnlyWhereRadiusBinds) {
  Vector mu(3);
  mu << 1.0, -2.0, 3.0;
  const ActiveSet active{BoundState::AtLower, BoundState::AtUpper, BoundState::AtLower};
  const Vector x = (Vector(3) << 0.0, 0.0, 5.0).finished();
  const Vector lo = (Vector(3) << 0.0, -kInf, -kInf).finished();
  const Vector hi = Vector::Constant(3, kInf);
  reset_trust_region_multipliers(mu, active, x, lo, hi, 1.0);
  EXPECT_EQ(mu[0], 1.0);  // problem bound at the step's lower end
  EXPECT_EQ(mu[1], 0.0);
  EXPECT_EQ(mu[2], 0.0);
}
