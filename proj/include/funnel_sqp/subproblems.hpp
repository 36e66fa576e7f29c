#pragma once

#include <optional>

#include "funnel_sqp/problem.hpp"
#include "funnel_sqp/qp_solver.hpp"

namespace funnel_sqp {

struct SubproblemConfig {
  double eta_initial = 1e-4;
  double eta_growth = 10.0;
  double eta_max = 1e20;
  /// Regularize the Hessian until the reduced Hessian is positive definite
  /// (line search); the trust region bounds the step otherwise.
  bool convexify = false;
  /// Try η = 0 before the first positive shift. When false every convexified
  /// Hessian carries at least η_initial.
  bool try_zero_shift = true;
  /// The elastic sum below this times (1 + ‖c‖∞) counts as a feasible
  /// linearization.
  double elastic_tolerance = 1e-8;
};

enum class Phase { Optimality, Restoration };

const char* to_string(Phase phase);

struct PhaseState {
  Phase phase = Phase::Optimality;
  /// Point where restoration was last entered (meaningful in Restoration).
  Vector x_resto;
  double h_resto = 0.0;
};

/// Optimality QP at the iterate: g = ∇f, A = ∇c, b = c, and step bounds
/// [max(l − x, −Δ), min(u − x, Δ)] (no Δ for line search).
QpData build_optimality_qp(const Iterate& iterate, const Matrix& hessian,
                           const Vector& lower, const Vector& upper,
                           std::optional<double> radius);

/// Elastic ℓ₁ feasibility QP over (d, u, v):
///   min ½dᵀW₀d + eᵀu + eᵀv  s.t.  c + ∇cᵀd − u + v = 0,  u, v ≥ 0,
/// with the trust region applied to d only.
QpData build_feasibility_qp(const Iterate& iterate, const Matrix& hessian0,
                            const Vector& lower, const Vector& upper,
                            std::optional<double> radius);

/// Feasible starting point (0, max(c, 0), max(−c, 0)) of the elastic QP,
/// with d projected onto its bounds.
Vector feasibility_qp_start(const QpData& fqp, std::size_t n_vars);

struct Convexified {
  Matrix hessian;
  double eta = 0.0;
};

/// Smallest η on the ladder {0, η₀, η₀·growth, …} for which
/// [[W + ηI, A], [Aᵀ, 0]] has inertia (n, rank A, 0), tested through the
/// inertia of the reduced Hessian Zᵀ(W + ηI)Z. Throws RegularizationFailed
/// past η_max.
Convexified convexify(const Matrix& hessian, const Matrix& jacobian,
                      const SubproblemConfig& config, double eta_floor = 0.0);

/// Zeroes bound multipliers whose active bound comes from the trust region
/// rather than from the problem bounds.
void reset_trust_region_multipliers(Vector& mu, const ActiveSet& active,
                                    const Vector& x, const Vector& lower,
                                    const Vector& upper,
                                    std::optional<double> radius);

struct Direction {
  QpSolution solution;
  /// Primal step in x (the d block for the feasibility QP).
  Vector d;
  /// Trial multipliers λ̂ and μ̂ (x bounds only).
  Vector lambda;
  Vector mu;
  /// Hessian used by the QP on the x block (after convexification).
  Matrix hessian;
  double eta = 0.0;
  Phase phase = Phase::Optimality;
  bool entered_restoration = false;
  /// Restoration only: the linearization is consistent (zero elastics).
  bool subproblem_feasible = true;
  /// Restoration only: elastic values at the solution.
  Vector elastic_u;
  Vector elastic_v;
};

/// Direction computation with the phase switch: solves the optimality QP
/// and falls back to the feasibility QP when it is infeasible. On entry to
/// restoration, records x_resto and zeroes the iterate's λ.
Direction compute_direction(Iterate& iterate, PhaseState& phase,
                            Evaluator& evaluator, QpSolver& solver,
                            const SubproblemConfig& config,
                            std::optional<double> radius);

/// Forces restoration from the current iterate (line search after α < α_min).
void enter_restoration(Iterate& iterate, PhaseState& phase);

}  // namespace funnel_sqp
