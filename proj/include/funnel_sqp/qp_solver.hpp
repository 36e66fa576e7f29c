#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "funnel_sqp/common.hpp"
#include "funnel_sqp/dense_linalg.hpp"

namespace funnel_sqp {

/// min ½dᵀWd + gᵀd  s.t.  Aᵀd + b = 0,  lb ≤ d ≤ ub.
/// A is n×m (one column per equality row); bounds may be ±∞.
struct QpData {
  Matrix hessian;  // W
  Vector gradient; // g
  Matrix jacobian; // A
  Vector constant; // b
  Vector lower;
  Vector upper;

  std::size_t n_vars() const { return static_cast<std::size_t>(gradient.size()); }
  std::size_t n_eq() const { return static_cast<std::size_t>(constant.size()); }
  double objective(const Vector& d) const {
    return 0.5 * d.dot(hessian * d) + gradient.dot(d);
  }
  /// Throws std::invalid_argument on inconsistent dimensions or lb > ub.
  void validate() const;
};

enum class QpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(QpStatus status);

enum class BoundState : unsigned char { Free, AtLower, AtUpper };

/// Working set of bound constraints: one state per variable.
using ActiveSet = std::vector<BoundState>;

struct QpSolution {
  QpStatus status = QpStatus::Optimal;
  Vector d;
  /// Multipliers of Aᵀd + b = 0 under the convention Wd + g − Aλ − μ = 0.
  Vector lambda;
  /// Bound multipliers: ≥ 0 at active lower bounds, ≤ 0 at active upper
  /// bounds, exactly 0 for variables not in the working set.
  Vector mu;
  double objective = 0.0;
  ActiveSet active_set;
  /// Working-set changes (additions plus deletions) in the main phase.
  std::size_t pivots = 0;
  /// ‖Aᵀd + b‖₁ reached by phase 1 (0 when the start was feasible).
  double phase1_residual = 0.0;
};

struct QpSolverConfig {
  /// Pivot cap is this factor times (n + m).
  std::size_t pivot_factor = 50;
  /// Phase-1 residual above this times (1 + ‖b‖∞) means infeasible.
  double feasibility_tolerance = 1e-10;
  /// Reduced-gradient norm below this times (1 + ‖g‖∞) is stationary.
  double stationarity_tolerance = 1e-11;
  /// Multipliers with the wrong sign beyond this times (1 + ‖g‖∞) are dropped.
  double multiplier_tolerance = 1e-10;
  /// Reduced-Hessian eigenvalues within this times (1 + ‖W‖∞) of zero are
  /// treated as zero curvature.
  double curvature_tolerance = 1e-10;
  /// Relative window in which ratio-test candidates are considered tied.
  double ratio_tie_tolerance = 1e-8;
  /// Indefinite problems with at most this many variables are finished by an
  /// exhaustive face search so that the global minimizer is returned.
  std::size_t global_search_max_vars = 6;
  LinalgConfig linalg;
};

/// Primal active-set null-space solver for dense, possibly indefinite QPs.
///
/// One instance per thread; the working set is mutable state during solve().
class QpSolver {
 public:
  explicit QpSolver(QpSolverConfig config = {}) : config_(config) {}

  const QpSolverConfig& config() const { return config_; }

  /// Solves from scratch (phase 1 then the main active-set loop). A warm
  /// start active set is tried first when given.
  QpSolution solve(const QpData& qp,
                   const std::optional<ActiveSet>& warm_start = std::nullopt);

  /// Main loop only, from a point known to satisfy all constraints.
  QpSolution solve_from_feasible(const QpData& qp, const Vector& start);

 private:
  struct Workspace;

  QpSolution run(const QpData& qp, const std::vector<std::size_t>& eq_rows,
                 Vector d, ActiveSet working, std::size_t pivot_budget);
  std::optional<QpSolution> try_warm_start(const QpData& qp,
                                           const std::vector<std::size_t>& eq_rows,
                                           const ActiveSet& warm);
  std::optional<std::pair<Vector, ActiveSet>> global_face_search(
      const QpData& qp, const std::vector<std::size_t>& eq_rows);

  QpSolverConfig config_;
};

struct Phase1Result {
  Vector d;
  double residual = 0.0;
};

/// Minimizes ‖Aᵀd + b‖₁ over lb ≤ d ≤ ub through the elastic LP
/// min eᵀu + eᵀv s.t. Aᵀd + b − u + v = 0, u, v ≥ 0.
Phase1Result phase1_start(const Matrix& a, const Vector& b, const Vector& lb,
                          const Vector& ub, const QpSolverConfig& config = {});

/// Convenience wrapper around a default-configured QpSolver.
QpSolution solve_qp(const QpData& qp,
                    const std::optional<ActiveSet>& warm_start = std::nullopt);

}  // namespace funnel_sqp
