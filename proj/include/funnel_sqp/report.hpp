#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "funnel_sqp/problem.hpp"
#include "funnel_sqp/solver.hpp"

namespace funnel_sqp {

inline constexpr const char* kRunSchema = "funnel-sqp run v1";
inline constexpr const char* kCompareHeader = "# funnel-sqp compare v1";
inline constexpr const char* kProfileHeader = "# funnel-sqp profile v1";

/// No rows, or fewer than two solvers, to build a profile from.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Malformed compare CSV.
class CsvFormatError : public Error {
 public:
  using Error::Error;
};

/// Sets one tunable from a KEY=VALUE override such as "funnel.kappa=0.3".
/// Throws std::invalid_argument for unknown keys or unparsable values.
void apply_parameter(SolverConfig& config, const std::string& assignment);
const std::vector<std::string>& parameter_keys();

/// Iteration table. Trust region: k, l, Δ, τ, ‖d‖∞, f, h, ‖∇L‖, status.
/// Line search adds α and η in place of Δ. The filter shows |F| for τ.
std::string format_table(const SolveResult& result, const SolverConfig& config);

/// One line such as "status: kkt-point  iterations: 6  f: -1  h: 0".
std::string format_summary(const SolveResult& result);

/// Machine-readable solve record; NaN values are written as null.
nlohmann::json run_report(const NcoProblem& problem, const SolverConfig& config,
                          const SolveResult& result, bool include_trace = true);

/// KktPoint and InfeasibleStationary are successful terminations.
bool is_success(SolveStatus status);

struct CompareRow {
  std::string problem;
  std::string strategy;
  std::string mechanism;
  std::string status;
  std::size_t iterations = 0;
  EvalCounters counters;
  StepCounts steps;
  double wall_time_seconds = 0.0;

  std::string solver() const { return strategy + "/" + mechanism; }
  bool success() const;
};

struct CompareJob {
  std::string name;
  /// Produces the problem; a throw becomes an "error" row.
  std::function<NcoProblem()> load;
};

/// Solves every job under the four strategy × mechanism presets. `tune` is
/// applied to each preset before solving. Rows are sorted by problem name
/// and then by configuration, independent of completion order.
std::vector<CompareRow> compare(const std::vector<CompareJob>& jobs,
                                const std::function<void(SolverConfig&)>& tune,
                                std::size_t threads);

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);
/// Reads rows written by write_compare_csv. Throws CsvFormatError.
std::vector<CompareRow> read_compare_csv(std::istream& in);

/// Cost columns usable as profile metrics.
const std::vector<std::string>& metric_names();
/// Throws std::invalid_argument for unknown metrics.
double metric_value(const CompareRow& row, const std::string& metric);

struct ProfilePoint {
  double alpha = 1.0;
  double fraction = 0.0;
};

struct Profile {
  std::string solver;
  /// Step-function breakpoints in increasing α, shared by all solvers.
  std::vector<ProfilePoint> points;
};

/// Performance ratios cost / best cost per problem (failures get ∞) and the
/// fraction of problems each solver solves within α of the best. A problem
/// missing a solver's row counts as a failure for that solver.
std::vector<Profile> performance_profile(const std::vector<CompareRow>& rows,
                                         const std::string& metric = "constraint_evals");

void write_profile_csv(std::ostream& out, const std::vector<Profile>& profiles);

}  // namespace funnel_sqp
