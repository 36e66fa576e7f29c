// funnel-sqp: single solves, four-configuration comparisons and performance
// profiles.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "funnel_sqp/builtin_problems.hpp"
#include "funnel_sqp/expression.hpp"
#include "funnel_sqp/report.hpp"
#include "funnel_sqp/solver.hpp"

using namespace funnel_sqp;

namespace {

enum class LogLevel { Quiet, Info, Trace };

LogLevel log_level_from_env() {
  const char* env = std::getenv("FUNNEL_SQP_LOG");
  if (env == nullptr || std::string(env).empty() || std::string(env) == "info") {
    return LogLevel::Info;
  }
  if (std::string(env) == "quiet") return LogLevel::Quiet;
  if (std::string(env) == "trace") return LogLevel::Trace;
  throw std::invalid_argument("FUNNEL_SQP_LOG must be trace, info or quiet, got '" +
                              std::string(env) + "'");
}

struct TuningFlags {
  double tolerance = 1e-6;
  std::size_t max_iter = 4000;
  bool gould_update = false;
  std::vector<std::string> seed_params;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--tol", tolerance, "KKT tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Maximum outer iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--gould-update", gould_update,
                  "Funnel update max[beta*tau, (1-kappa)h_trial + kappa*h]");
    cmd->add_option("--seed-params", seed_params,
                    "Parameter overrides KEY=VAL (see 'funnel-sqp params')");
  }

  void apply(SolverConfig& config) const {
    config.tolerance = tolerance;
    config.max_outer_iterations = max_iter;
    config.funnel.gould_update = gould_update;
    for (const auto& kv : seed_params) apply_parameter(config, kv);
  }
};

NcoProblem load_source(const std::string& problem, const std::string& model) {
  if (!model.empty()) return load_model(model);
  return builtin(problem);
}

int cmd_run(const std::string& problem_name, const std::string& model,
            const std::string& strategy, const std::string& mechanism,
            const TuningFlags& tuning, const std::string& json_path, LogLevel log) {
  SolverConfig config =
      SolverConfig::preset(parse_strategy(strategy), parse_mechanism(mechanism));
  tuning.apply(config);
  const NcoProblem problem = load_source(problem_name, model);
  if (log == LogLevel::Trace) {
    config.on_record = [](const IterationRecord& r) {
      std::cerr << "[trace] k=" << r.k << " l=" << r.l << " f=" << r.f << " h=" << r.h
                << " " << r.label << '\n';
    };
  }
  const SolveResult result = solve(problem, config);
  if (log != LogLevel::Quiet) {
    std::cout << format_table(result, config) << format_summary(result) << '\n';
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write '" + json_path + "'");
    out << run_report(problem, config, result).dump(2) << '\n';
  }
  return is_success(result.status) ? 0 : 1;
}

int cmd_compare(std::vector<std::string> problems, const std::vector<std::string>& models,
                const TuningFlags& tuning, const std::string& csv_path, std::size_t jobs,
                LogLevel log) {
  if (problems.empty() && models.empty()) problems = builtin_names();
  // check overrides before spending time on solves
  SolverConfig probe;
  tuning.apply(probe);
  std::vector<CompareJob> work;
  for (const auto& name : problems) {
    work.push_back({name, [name] { return builtin(name); }});
  }
  for (const auto& path : models) {
    work.push_back({std::filesystem::path(path).stem().string(),
                    [path] { return load_model(path); }});
  }
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto rows = compare(work, [&tuning](SolverConfig& c) { tuning.apply(c); }, jobs);
  if (csv_path.empty() || csv_path == "-") {
    write_compare_csv(std::cout, rows);
  } else {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write '" + csv_path + "'");
    write_compare_csv(out, rows);
    if (log != LogLevel::Quiet) {
      std::size_t ok = 0;
      for (const auto& r : rows) ok += r.success() ? 1 : 0;
      std::cout << rows.size() << " runs, " << ok << " successful, written to "
                << csv_path << '\n';
    }
  }
  return 0;
}

int cmd_profile(const std::vector<std::string>& inputs, const std::string& metric,
                const std::string& csv_path) {
  std::vector<CompareRow> rows;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    auto part = read_compare_csv(in);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto profiles = performance_profile(rows, metric);
  if (csv_path.empty() || csv_path == "-") {
    write_profile_csv(std::cout, profiles);
  } else {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write '" + csv_path + "'");
    write_profile_csv(out, profiles);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restoration SQP with funnel or filter globalization"};
  app.name("funnel-sqp");
  app.require_subcommand(1);

  std::string problem, model, strategy = "funnel", mechanism = "trust-region", json_path;
  TuningFlags run_tuning;
  auto* run = app.add_subcommand("run", "Solve one problem and print the iteration table");
  auto* problem_opt = run->add_option("--problem", problem, "Registry problem name");
  auto* model_opt = run->add_option("--model", model, "Model file (.nco)")
                        ->check(CLI::ExistingFile);
  problem_opt->excludes(model_opt);
  run->add_option("--strategy", strategy, "funnel or filter")
      ->check(CLI::IsMember({"funnel", "filter"}))
      ->capture_default_str();
  run->add_option("--mechanism", mechanism, "trust-region or line-search")
      ->check(CLI::IsMember({"trust-region", "line-search"}))
      ->capture_default_str();
  run->add_option("--json", json_path, "Write the run report to this path");
  run_tuning.add_to(run);

  std::vector<std::string> cmp_problems, cmp_models;
  std::string csv_path;
  std::size_t jobs = 0;
  TuningFlags cmp_tuning;
  auto* cmp = app.add_subcommand("compare", "Run all four configurations and write CSV");
  cmp->add_option("--problem", cmp_problems, "Registry problems (default: all)");
  cmp->add_option("--model", cmp_models, "Model files")->check(CLI::ExistingFile);
  cmp->add_option("--csv", csv_path, "Output path (default: stdout)");
  cmp->add_option("--jobs", jobs, "Worker threads (default: hardware threads)");
  cmp_tuning.add_to(cmp);

  std::vector<std::string> inputs;
  std::string metric = "constraint_evals", profile_csv;
  auto* prof = app.add_subcommand("profile", "Performance profiles from compare CSV files");
  prof->add_option("inputs", inputs, "Compare CSV files")->required()->check(CLI::ExistingFile);
  prof->add_option("--metric", metric, "Cost column")
      ->check(CLI::IsMember(metric_names()))
      ->capture_default_str();
  prof->add_option("--csv", profile_csv, "Output path (default: stdout)");

  auto* list = app.add_subcommand("list", "List registry problems");
  auto* params = app.add_subcommand("params", "List --seed-params keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const LogLevel log = log_level_from_env();
    if (*run) {
      if (problem.empty() && model.empty()) {
        throw std::invalid_argument("run needs --problem or --model");
      }
      return cmd_run(problem, model, strategy, mechanism, run_tuning, json_path, log);
    }
    if (*cmp) return cmd_compare(cmp_problems, cmp_models, cmp_tuning, csv_path, jobs, log);
    if (*prof) return cmd_profile(inputs, metric, profile_csv);
    if (*list) {
      for (const auto& name : builtin_names()) std::cout << name << '\n';
      return 0;
    }
    if (*params) {
      for (const auto& key : parameter_keys()) std::cout << key << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "funnel-sqp: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
