#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "funnel_sqp/builtin_problems.hpp"
#include "funnel_sqp/report.hpp"

using namespace funnel_sqp;

namespace {

CompareRow row(const std::string& problem, const std::string& strategy, bool ok,
               std::size_t c_evals) {
  CompareRow r;
  r.problem = problem;
  r.strategy = strategy;
  r.mechanism = "trust-region";
  r.status = ok ? "kkt-point" : "max-iterations";
  r.counters.n_c = c_evals;
  r.iterations = c_evals;
  return r;
}

const Profile& find(const std::vector<Profile>& ps, const std::string& solver) {
  for (const auto& p : ps)
    if (p.solver == solver) return p;
  throw std::runtime_error("no profile for " + solver);
}

double fraction_at(const Profile& p, double alpha) {
  double out = 0.0;
  for (const auto& pt : p.points)
    if (pt.alpha <= alpha) out = pt.fraction;
  return out;
}

std::vector<CompareJob> jobs(std::initializer_list<const char*> names) {
  std::vector<CompareJob> out;
  for (const char* n : names) out.push_back({n, [n] { return builtin(n); }});
  return out;
}

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " + std::string(FUNNEL_SQP_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST(Profile, TwoSolversSwapWins) {
  const std::vector<CompareRow> rows = {row("p1", "a", true, 2), row("p2", "a", true, 4),
                                        row("p1", "b", true, 4), row("p2", "b", true, 2)};
  const auto ps = performance_profile(rows);
  ASSERT_EQ(ps.size(), 2u);
  for (const auto& p : ps) {
    ASSERT_EQ(p.points.size(), 2u);
    EXPECT_EQ(p.points[0].alpha, 1.0);
    EXPECT_EQ(p.points[0].fraction, 0.5);
    EXPECT_EQ(p.points[1].alpha, 2.0);
    EXPECT_EQ(p.points[1].fraction, 1.0);
  }
}

TEST(Profile, FailingSolverStaysAtZero) {
  const std::vector<CompareRow> rows = {row("p1", "a", true, 3), row("p2", "a", true, 5),
                                        row("p1", "b", false, 1), row("p2", "b", false, 1)};
  const auto ps = performance_profile(rows);
  for (const auto& pt : find(ps, "b/trust-region").points) EXPECT_EQ(pt.fraction, 0.0);
  EXPECT_EQ(fraction_at(find(ps, "a/trust-region"), 1.0), 1.0);
}

TEST(Profile, TieOnSingleProblem) {
  const auto ps = performance_profile({row("p", "a", true, 7), row("p", "b", true, 7)});
  for (const auto& p : ps) {
    ASSERT_EQ(p.points.size(), 1u);
    EXPECT_EQ(p.points[0].alpha, 1.0);
    EXPECT_EQ(p.points[0].fraction, 1.0);
  }
}

TEST(Profile, EmptyInputs) {
  EXPECT_THROW(performance_profile({}), EmptyInput);
  EXPECT_THROW(performance_profile({row("p", "a", true, 1)}), EmptyInput);
  EXPECT_THROW(performance_profile({row("p", "a", true, 1), row("p", "b", true, 1)}, "bogus"),
               std::invalid_argument);
}

TEST(Profile, MonotoneAndBoundedOnRandomRows) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> cost(1, 50);
  std::bernoulli_distribution ok(0.8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CompareRow> rows;
    for (int p = 0; p < 1 + trial % 9; ++p)
      for (const char* s : {"a", "b", "c"})
        rows.push_back(row("p" + std::to_string(p), s, ok(rng), cost(rng)));
    for (const auto& prof : performance_profile(rows)) {
      double last_alpha = 0.0, last_fraction = 0.0;
      for (const auto& pt : prof.points) {
        EXPECT_GT(pt.alpha, last_alpha);
        EXPECT_GE(pt.fraction, last_fraction);
        EXPECT_LE(pt.fraction, 1.0);
        EXPECT_GE(pt.alpha, 1.0);
        last_alpha = pt.alpha;
        last_fraction = pt.fraction;
      }
    }
  }
}

TEST(CompareCsv, RoundTrip) {
  const auto rows = compare(jobs({"circle", "maratos-fletcher"}), nullptr, 2);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].problem, "circle");
  EXPECT_EQ(rows[4].problem, "maratos-fletcher");
  EXPECT_EQ(rows[4].solver(), "funnel/trust-region");
  EXPECT_EQ(rows[4].steps.f_type, 6u);
  EXPECT_EQ(rows[4].steps.h_type, 0u);
  EXPECT_EQ(rows[4].steps.restoration, 0u);
  EXPECT_EQ(rows[4].counters.n_c, 9u);
  for (const auto& r : rows) EXPECT_TRUE(r.success()) << r.problem << " " << r.solver();

  std::stringstream s;
  write_compare_csv(s, rows);
  const auto back = read_compare_csv(s);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].problem, rows[i].problem);
    EXPECT_EQ(back[i].solver(), rows[i].solver());
    EXPECT_EQ(back[i].status, rows[i].status);
    EXPECT_EQ(back[i].counters.n_c, rows[i].counters.n_c);
    EXPECT_EQ(back[i].steps.h_type, rows[i].steps.h_type);
  }
}

TEST(CompareCsv, ResultsIndependentOfThreadCount) {
  const auto one = compare(jobs({"hs071", "powellbs", "circle"}), nullptr, 1);
  const auto four = compare(jobs({"hs071", "powellbs", "circle"}), nullptr, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].problem, four[i].problem);
    EXPECT_EQ(one[i].solver(), four[i].solver());
    EXPECT_EQ(one[i].iterations, four[i].iterations);
    EXPECT_EQ(one[i].counters.n_c, four[i].counters.n_c);
  }
}

TEST(CompareCsv, LoadFailureBecomesErrorRow) {
  std::vector<CompareJob> js = {{"broken", []() -> NcoProblem { throw Error("bad model"); }}};
  const auto rows = compare(js, nullptr, 1);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "error");
    EXPECT_FALSE(r.success());
  }
}

TEST(CompareCsv, RejectsMalformedInput) {
  std::stringstream no_header("problem,strategy\n");
  EXPECT_THROW(read_compare_csv(no_header), CsvFormatError);
  std::stringstream bad_columns(std::string(kCompareHeader) + "\nproblem,strategy\n");
  EXPECT_THROW(read_compare_csv(bad_columns), CsvFormatError);
  std::stringstream good;
  write_compare_csv(good, {row("p", "a", true, 1)});
  std::string text = good.str() + "p,a,trust-region,kkt-point,1\n";
  std::stringstream short_row(text);
  EXPECT_THROW(read_compare_csv(short_row), CsvFormatError);
}

TEST(RunReport, JsonFields) {
  const NcoProblem p = builtin("circle");
  const auto config = SolverConfig::preset(StrategyKind::Filter, MechanismKind::LineSearch);
  const auto result = solve(p, config);
  const auto j = run_report(p, config, result);
  EXPECT_EQ(j["schema"], kRunSchema);
  EXPECT_EQ(j["problem"]["name"], "circle");
  EXPECT_EQ(j["problem"]["n_vars"], 2);
  EXPECT_EQ(j["status"], "kkt-point");
  EXPECT_EQ(j["iterations"], result.outer_iterations);
  EXPECT_EQ(j["final"]["x"].size(), 2u);
  EXPECT_NEAR(j["final"]["x"][0].get<double>(), 0.5, 1e-8);
  EXPECT_EQ(j["trace"].size(), result.trace.size());
  EXPECT_TRUE(j["trace"][0]["step_norm"].is_null());
  for (const char* key : {"config", "counters", "steps", "wall_time_seconds", "error", "message"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_FALSE(run_report(p, config, result, false).contains("trace"));
}

TEST(Parameters, ApplyKnownAndRejectUnknown) {
  auto c = SolverConfig::preset(StrategyKind::Funnel, MechanismKind::TrustRegion);
  apply_parameter(c, "funnel.kappa=0.3");
  EXPECT_EQ(c.funnel.kappa, 0.3);
  apply_parameter(c, "filter.capacity=7");
  EXPECT_EQ(c.filter.capacity, 7u);
  apply_parameter(c, "funnel.gould_update=true");
  EXPECT_TRUE(c.funnel.gould_update);
  apply_parameter(c, "tr.initial_radius=2.5");
  EXPECT_EQ(c.trust_region.initial_radius, 2.5);
  EXPECT_THROW(apply_parameter(c, "funnel.nope=1"), std::invalid_argument);
  EXPECT_THROW(apply_parameter(c, "funnel.kappa=abc"), std::invalid_argument);
  EXPECT_THROW(apply_parameter(c, "funnel.kappa"), std::invalid_argument);
  const auto& keys = parameter_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "funnel.kappa"), keys.end());
  EXPECT_NE(std::find(keys.begin(), keys.end(), "unbounded_threshold"), keys.end());
}

TEST(Table, ColumnsFollowMechanismAndStrategy) {
  const NcoProblem p = builtin("maratos-fletcher");
  auto tr = SolverConfig::preset(StrategyKind::Funnel, MechanismKind::TrustRegion);
  const std::string t1 = format_table(solve(p, tr), tr);
  EXPECT_NE(t1.find("Delta"), std::string::npos);
  EXPECT_NE(t1.find("rejected (Armijo)"), std::string::npos);
  auto ls = SolverConfig::preset(StrategyKind::Filter, MechanismKind::LineSearch);
  const std::string t2 = format_table(solve(p, ls), ls);
  EXPECT_NE(t2.find("alpha"), std::string::npos);
  EXPECT_NE(t2.find("eta"), std::string::npos);
  EXPECT_NE(t2.find("|F|"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("run --problem circle"), 0);
  EXPECT_EQ(cli("run --problem infeasible"), 0);
  EXPECT_EQ(cli("run --problem unbounded-quartic"), 1);
  EXPECT_EQ(cli("run --problem no-such-problem"), 2);
  EXPECT_EQ(cli("run --problem circle --seed-params funnel.nope=1"), 2);
  EXPECT_EQ(cli("run --model /nonexistent/model.nco"), 2);
  EXPECT_EQ(cli("list"), 0);
  EXPECT_EQ(cli("run --problem circle", "FUNNEL_SQP_LOG=bogus"), 2);
  EXPECT_EQ(cli("run --problem circle", "FUNNEL_SQP_LOG=quiet"), 0);
}

TEST(Cli, CompareThenProfile) {
  const auto dir = std::filesystem::temp_directory_path() / "funnel_sqp_cli_test";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "cmp.csv").string();
  const auto prof = (dir / "prof.csv").string();
  ASSERT_EQ(cli("compare --problem circle --problem hs071 --jobs 2 --csv " + csv), 0);
  std::ifstream in(csv);
  const auto rows = read_compare_csv(in);
  EXPECT_EQ(rows.size(), 8u);
  ASSERT_EQ(cli("profile " + csv + " --csv " + prof), 0);
  std::ifstream pin(prof);
  std::string line;
  std::getline(pin, line);
  EXPECT_EQ(line, kProfileHeader);
  std::getline(pin, line);
  EXPECT_EQ(line, "solver,alpha,fraction");
  std::filesystem::remove_all(dir);
}
