#include "funnel_sqp/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace funnel_sqp {

namespace {

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument("invalid number '" + text + "' for " + what);
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "on") return true;
  if (text == "0" || text == "false" || text == "off") return false;
  throw std::invalid_argument("invalid boolean '" + text + "' for " + what);
}

using Setter = std::function<void(SolverConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [&t](const std::string& key, auto member) {
      t[key] = [key, member](SolverConfig& c, const std::string& v) {
        member(c) = parse_double(v, key);
      };
    };
    real("funnel.tau_bar", [](SolverConfig& c) -> double& { return c.funnel.tau_bar; });
    real("funnel.kappa_bar", [](SolverConfig& c) -> double& { return c.funnel.kappa_bar; });
    real("funnel.kappa", [](SolverConfig& c) -> double& { return c.funnel.kappa; });
    real("funnel.delta", [](SolverConfig& c) -> double& { return c.funnel.delta; });
    real("funnel.sigma", [](SolverConfig& c) -> double& { return c.funnel.sigma; });
    real("funnel.beta", [](SolverConfig& c) -> double& { return c.funnel.beta; });
    real("filter.beta", [](SolverConfig& c) -> double& { return c.filter.beta; });
    real("filter.gamma", [](SolverConfig& c) -> double& { return c.filter.gamma; });
    real("filter.tau_bar", [](SolverConfig& c) -> double& { return c.filter.tau_bar; });
    real("filter.kappa_bar", [](SolverConfig& c) -> double& { return c.filter.kappa_bar; });
    real("filter.delta", [](SolverConfig& c) -> double& { return c.filter.delta; });
    real("filter.sigma", [](SolverConfig& c) -> double& { return c.filter.sigma; });
    real("tr.initial_radius",
         [](SolverConfig& c) -> double& { return c.trust_region.initial_radius; });
    real("tr.grow", [](SolverConfig& c) -> double& { return c.trust_region.grow; });
    real("tr.shrink", [](SolverConfig& c) -> double& { return c.trust_region.shrink; });
    real("tr.min_radius", [](SolverConfig& c) -> double& { return c.trust_region.min_radius; });
    real("tr.max_radius", [](SolverConfig& c) -> double& { return c.trust_region.max_radius; });
    real("ls.shrink", [](SolverConfig& c) -> double& { return c.line_search.shrink; });
    real("ls.alpha_min", [](SolverConfig& c) -> double& { return c.line_search.alpha_min; });
    real("eta.initial", [](SolverConfig& c) -> double& { return c.subproblem.eta_initial; });
    real("eta.growth", [](SolverConfig& c) -> double& { return c.subproblem.eta_growth; });
    real("eta.max", [](SolverConfig& c) -> double& { return c.subproblem.eta_max; });
    real("unbounded_threshold",
         [](SolverConfig& c) -> double& { return c.unbounded_threshold; });
    t["filter.capacity"] = [](SolverConfig& c, const std::string& v) {
      const double cap = parse_double(v, "filter.capacity");
      if (cap < 1 || cap != std::floor(cap)) {
        throw std::invalid_argument("filter.capacity must be a positive integer");
      }
      c.filter.capacity = static_cast<std::size_t>(cap);
    };
    t["funnel.gould_update"] = [](SolverConfig& c, const std::string& v) {
      c.funnel.gould_update = parse_bool(v, "funnel.gould_update");
    };
    t["ls.small_step_termination"] = [](SolverConfig& c, const std::string& v) {
      c.line_search.small_step_termination = parse_bool(v, "ls.small_step_termination");
    };
    t["eta.try_zero_shift"] = [](SolverConfig& c, const std::string& v) {
      c.subproblem.try_zero_shift = parse_bool(v, "eta.try_zero_shift");
    };
    return t;
  }();
  return table;
}

std::string fmt(const char* format, double v) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json vector_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_or_null(v[i]));
  return arr;
}

nlohmann::json counters_json(const EvalCounters& c) {
  return {{"n_f", c.n_f},
          {"n_c", c.n_c},
          {"n_grad_f", c.n_grad_f},
          {"n_jac_c", c.n_jac_c},
          {"n_hess", c.n_hess}};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "problem",         "strategy",       "mechanism",       "status",
      "iterations",      "objective_evals", "constraint_evals", "gradient_evals",
      "jacobian_evals",  "hessian_evals",  "f_type",          "h_type",
      "restoration",     "wall_time"};
  return cols;
}

std::size_t parse_count(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw CsvFormatError("line " + std::to_string(line) + ": invalid count '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

void apply_parameter(SolverConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("expected KEY=VALUE, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  const auto it = setters().find(key);
  if (it == setters().end()) {
    throw std::invalid_argument("unknown parameter '" + key + "'");
  }
  it->second(config, value);
}

const std::vector<std::string>& parameter_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

std::string format_table(const SolveResult& result, const SolverConfig& config) {
  const bool line_search = config.mechanism == MechanismKind::LineSearch;
  const bool filter = config.strategy == StrategyKind::Filter;
  std::ostringstream out;
  char buf[256];
  if (line_search) {
    std::snprintf(buf, sizeof buf, "%4s %3s %9s %9s %9s %10s %12s %11s %11s  %s\n", "k",
                  "l", "alpha", "eta", filter ? "|F|" : "tau", "||d||", "f", "h",
                  "||gradL||", "status");
  } else {
    std::snprintf(buf, sizeof buf, "%4s %3s %9s %9s %10s %12s %11s %11s  %s\n", "k", "l",
                  "Delta", filter ? "|F|" : "tau", "||d||", "f", "h", "||gradL||",
                  "status");
  }
  out << buf;
  for (const auto& r : result.trace) {
    const std::string l = r.l == 0 ? "" : std::to_string(r.l);
    const std::string width =
        filter ? std::to_string(r.filter_size) : fmt("%.3g", r.width);
    if (line_search) {
      std::snprintf(buf, sizeof buf, "%4zu %3s %9s %9s %9s %10s %12s %11s %11s  %s\n",
                    r.k, l.c_str(), fmt("%.3g", r.alpha).c_str(),
                    fmt("%.0e", r.eta).c_str(), width.c_str(),
                    fmt("%.3e", r.step_norm).c_str(), fmt("%.5e", r.f).c_str(),
                    fmt("%.3e", r.h).c_str(), fmt("%.3e", r.lagrangian_norm).c_str(),
                    r.label.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%4zu %3s %9s %9s %10s %12s %11s %11s  %s\n", r.k,
                    l.c_str(), fmt("%.4g", r.radius).c_str(), width.c_str(),
                    fmt("%.3e", r.step_norm).c_str(), fmt("%.5e", r.f).c_str(),
                    fmt("%.3e", r.h).c_str(), fmt("%.3e", r.lagrangian_norm).c_str(),
                    r.label.c_str());
    }
    out << buf;
  }
  return out.str();
}

std::string format_summary(const SolveResult& result) {
  std::ostringstream out;
  out << "status: " << to_string(result.status);
  if (result.status == SolveStatus::Error) {
    out << " (" << to_string(result.error) << ": " << result.message << ")";
  }
  out << "  iterations: " << result.outer_iterations
      << "  f: " << fmt("%.10g", result.final_iterate.f)
      << "  h: " << fmt("%.3e", result.final_iterate.h)
      << "  constraint evals: " << result.counters.n_c;
  return out.str();
}

nlohmann::json run_report(const NcoProblem& problem, const SolverConfig& config,
                          const SolveResult& result, bool include_trace) {
  nlohmann::json j;
  j["schema"] = kRunSchema;
  j["problem"] = {{"name", problem.name},
                  {"n_vars", problem.n_vars},
                  {"n_eq", problem.n_eq}};
  j["config"] = {{"strategy", to_string(config.strategy)},
                 {"mechanism", to_string(config.mechanism)},
                 {"tolerance", config.tolerance},
                 {"max_outer_iterations", config.max_outer_iterations},
                 {"gould_update", config.funnel.gould_update}};
  j["status"] = to_string(result.status);
  j["error"] = result.status == SolveStatus::Error
                   ? nlohmann::json(to_string(result.error))
                   : nlohmann::json(nullptr);
  j["message"] = result.message;
  j["iterations"] = result.outer_iterations;
  j["counters"] = counters_json(result.counters);
  j["steps"] = {{"f_type", result.steps.f_type},
                {"h_type", result.steps.h_type},
                {"restoration", result.steps.restoration},
                {"zero", result.steps.zero}};
  j["final"] = {{"x", vector_json(result.final_iterate.x)},
                {"lambda", vector_json(result.final_iterate.lambda)},
                {"f", number_or_null(result.final_iterate.f)},
                {"h", number_or_null(result.final_iterate.h)},
                {"phase", to_string(result.final_phase)}};
  j["wall_time_seconds"] = result.wall_time_seconds;
  if (include_trace) {
    auto rows = nlohmann::json::array();
    for (const auto& r : result.trace) {
      rows.push_back({{"k", r.k},
                      {"l", r.l},
                      {"radius", number_or_null(r.radius)},
                      {"alpha", number_or_null(r.alpha)},
                      {"eta", number_or_null(r.eta)},
                      {"width", number_or_null(r.width)},
                      {"filter_size", r.filter_size},
                      {"step_norm", number_or_null(r.step_norm)},
                      {"f", number_or_null(r.f)},
                      {"h", number_or_null(r.h)},
                      {"lagrangian_norm", number_or_null(r.lagrangian_norm)},
                      {"label", r.label},
                      {"accepted", r.accepted}});
    }
    j["trace"] = std::move(rows);
  }
  return j;
}

bool is_success(SolveStatus status) {
  return status == SolveStatus::KktPoint || status == SolveStatus::InfeasibleStationary;
}

bool CompareRow::success() const {
  return status == to_string(SolveStatus::KktPoint) ||
         status == to_string(SolveStatus::InfeasibleStationary);
}

std::vector<CompareRow> compare(const std::vector<CompareJob>& jobs,
                                const std::function<void(SolverConfig&)>& tune,
                                std::size_t threads) {
  static constexpr std::pair<StrategyKind, MechanismKind> configs[] = {
      {StrategyKind::Funnel, MechanismKind::TrustRegion},
      {StrategyKind::Funnel, MechanismKind::LineSearch},
      {StrategyKind::Filter, MechanismKind::TrustRegion},
      {StrategyKind::Filter, MechanismKind::LineSearch}};
  constexpr std::size_t n_configs = std::size(configs);

  // Problems are loaded once up front; a load failure marks all four rows.
  std::vector<std::optional<NcoProblem>> problems(jobs.size());
  std::vector<std::string> load_errors(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      problems[i] = jobs[i].load();
    } catch (const std::exception& e) {
      load_errors[i] = e.what();
    }
  }

  std::vector<CompareRow> rows(jobs.size() * n_configs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= rows.size()) return;
      const std::size_t p = task / n_configs;
      const auto [strategy, mechanism] = configs[task % n_configs];
      CompareRow& row = rows[task];
      row.problem = jobs[p].name;
      row.strategy = to_string(strategy);
      row.mechanism = to_string(mechanism);
      if (!problems[p]) {
        row.status = to_string(SolveStatus::Error);
        continue;
      }
      SolverConfig config = SolverConfig::preset(strategy, mechanism);
      if (tune) tune(config);
      try {
        const SolveResult result = solve(*problems[p], config);
        row.status = to_string(result.status);
        row.iterations = result.outer_iterations;
        row.counters = result.counters;
        row.steps = result.steps;
        row.wall_time_seconds = result.wall_time_seconds;
      } catch (const std::exception&) {
        row.status = to_string(SolveStatus::Error);
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, rows.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // stable: equal problem names keep configuration order
  std::stable_sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) {
    return a.problem < b.problem;
  });
  return rows;
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << kCompareHeader << '\n';
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  char wall[32];
  for (const auto& r : rows) {
    std::snprintf(wall, sizeof wall, "%.6f", r.wall_time_seconds);
    out << r.problem << ',' << r.strategy << ',' << r.mechanism << ',' << r.status << ','
        << r.iterations << ',' << r.counters.n_f << ',' << r.counters.n_c << ','
        << r.counters.n_grad_f << ',' << r.counters.n_jac_c << ',' << r.counters.n_hess
        << ',' << r.steps.f_type << ',' << r.steps.h_type << ',' << r.steps.restoration
        << ',' << wall << '\n';
  }
}

std::vector<CompareRow> read_compare_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kCompareHeader) {
    throw CsvFormatError("missing '" + std::string(kCompareHeader) + "' header");
  }
  ++line_no;
  if (!std::getline(in, line) || split(line, ',') != csv_columns()) {
    throw CsvFormatError("line 2: unexpected column names");
  }
  std::vector<CompareRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != csv_columns().size()) {
      throw CsvFormatError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(csv_columns().size()) + " fields");
    }
    CompareRow r;
    r.problem = cells[0];
    r.strategy = cells[1];
    r.mechanism = cells[2];
    r.status = cells[3];
    r.iterations = parse_count(cells[4], line_no);
    r.counters.n_f = parse_count(cells[5], line_no);
    r.counters.n_c = parse_count(cells[6], line_no);
    r.counters.n_grad_f = parse_count(cells[7], line_no);
    r.counters.n_jac_c = parse_count(cells[8], line_no);
    r.counters.n_hess = parse_count(cells[9], line_no);
    r.steps.f_type = parse_count(cells[10], line_no);
    r.steps.h_type = parse_count(cells[11], line_no);
    r.steps.restoration = parse_count(cells[12], line_no);
    try {
      r.wall_time_seconds = parse_double(cells[13], "wall_time");
    } catch (const std::invalid_argument& e) {
      throw CsvFormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "constraint_evals", "objective_evals", "gradient_evals", "jacobian_evals",
      "hessian_evals",    "iterations",      "wall_time"};
  return names;
}

double metric_value(const CompareRow& row, const std::string& metric) {
  if (metric == "constraint_evals") return static_cast<double>(row.counters.n_c);
  if (metric == "objective_evals") return static_cast<double>(row.counters.n_f);
  if (metric == "gradient_evals") return static_cast<double>(row.counters.n_grad_f);
  if (metric == "jacobian_evals") return static_cast<double>(row.counters.n_jac_c);
  if (metric == "hessian_evals") return static_cast<double>(row.counters.n_hess);
  if (metric == "iterations") return static_cast<double>(row.iterations);
  if (metric == "wall_time") return row.wall_time_seconds;
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

std::vector<Profile> performance_profile(const std::vector<CompareRow>& rows,
                                         const std::string& metric) {
  if (rows.empty()) throw EmptyInput("no rows to profile");
  std::vector<std::string> solvers;
  std::vector<std::string> problems;
  // cost[problem][solver], ∞ for failures
  std::map<std::string, std::map<std::string, double>> cost;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    const std::string s = r.solver();
    if (std::find(solvers.begin(), solvers.end(), s) == solvers.end()) solvers.push_back(s);
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) {
      problems.push_back(r.problem);
    }
    cost[r.problem][s] = r.success() ? metric_value(r, metric) : inf;
  }
  if (solvers.size() < 2) {
    throw EmptyInput("a profile needs at least two solvers, found " +
                     std::to_string(solvers.size()));
  }
  std::map<std::string, std::vector<double>> ratios;
  std::set<double> breakpoints{1.0};
  for (const auto& p : problems) {
    double best = inf;
    for (const auto& s : solvers) {
      const auto it = cost[p].find(s);
      if (it != cost[p].end()) best = std::min(best, it->second);
    }
    for (const auto& s : solvers) {
      const auto it = cost[p].find(s);
      double r = inf;
      if (it != cost[p].end() && std::isfinite(it->second)) {
        r = best > 0.0 ? it->second / best : 1.0;
        breakpoints.insert(r);
      }
      ratios[s].push_back(r);
    }
  }
  const double n_problems = static_cast<double>(problems.size());
  std::vector<Profile> out;
  for (const auto& s : solvers) {
    Profile prof;
    prof.solver = s;
    for (double alpha : breakpoints) {
      const auto solved = std::count_if(ratios[s].begin(), ratios[s].end(),
                                        [alpha](double r) { return r <= alpha; });
      prof.points.push_back({alpha, static_cast<double>(solved) / n_problems});
    }
    out.push_back(std::move(prof));
  }
  return out;
}

void write_profile_csv(std::ostream& out, const std::vector<Profile>& profiles) {
  out << kProfileHeader << '\n' << "solver,alpha,fraction\n";
  char buf[64];
  for (const auto& prof : profiles) {
    for (const auto& pt : prof.points) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g", pt.alpha, pt.fraction);
      out << prof.solver << ',' << buf << '\n';
    }
  }
}

}  // namespace funnel_sqp
