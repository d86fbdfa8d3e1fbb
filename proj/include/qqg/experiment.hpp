#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qqg/benchmarks.hpp"
#include "qqg/config.hpp"
#include "qqg/csv.hpp"
#include "qqg/logistic.hpp"
#include "qqg/random.hpp"
#include "qqg/run.hpp"
#include "qqg/trace.hpp"

namespace qqg {

inline Objective make_objective(const ObjectiveSpec& spec) {
  if (spec.name == "logistic") {
    const LogisticDataset data = spec.data_csv
                                     ? read_logistic_csv(*spec.data_csv)
                                     : make_synthetic_logistic(spec.samples, spec.features, spec.data_seed);
    if (data.features.cols() != spec.dim)
      throw ConfigError("logistic data has " + std::to_string(data.features.cols()) +
                        " feature columns; set features = " + std::to_string(data.features.cols() - 1));
    return make_logistic(data);
  }
  return make_benchmark(spec.name, spec.dim);
}

/// Explicit points if given, else `count` uniform draws from the domain box
/// (coordinates in order, one Rng stream for all starts).
inline std::vector<Vector> make_starts(const StartSpec& spec, const Objective& obj) {
  if (!spec.points.empty()) return spec.points;
  detail::require(obj.domain_box().has_value(),
                  "make_starts: objective '" + obj.name() + "' has no domain box");
  Rng rng(spec.seed);
  std::vector<Vector> out;
  for (long k = 0; k < spec.count; ++k)
    out.push_back(rng.uniform_vector(obj.domain_box()->lower, obj.domain_box()->upper));
  return out;
}

struct RunSummary {
  std::string cell;
  long start = 0;
  RunStatus status = RunStatus::MaxIterations;
  double final_f = 0.0;
  long iterations = 0;
  std::optional<long> iters_to_tol;
  std::optional<long> iters_to_target;
  EvalCounts evals;
  std::string trace_file;
};

struct CellSummary {
  std::string label;
  Algorithm algorithm = Algorithm::GD;
  Transform transform = Transform::Vanilla;
  Goal goal = Goal::Minimize;
  double lr = 0.0;
  long starts = 0;
  long converged = 0;
  long diverged = 0;
  /// Start index whose final f is the (lower) median; its trace's last row
  /// carries final_f.
  long median_start = 0;
  double final_f = 0.0;
  long iterations = 0;
  std::optional<long> iters_to_tol;
  std::optional<long> iters_to_target;
  long value_evals = 0;
  long gradient_evals = 0;
  long hessian_evals = 0;
};

struct ExperimentResult {
  std::string objective;
  Index dim = 0;
  std::filesystem::path directory;
  std::vector<RunSummary> runs;
  std::vector<CellSummary> cells;

  bool any_diverged() const {
    return std::any_of(runs.begin(), runs.end(),
                       [](const RunSummary& r) { return r.status == RunStatus::Diverged; });
  }
};

namespace detail {

// Lower median, so the value always belongs to an actual run. Missing values
// sort last.
template <class T>
std::optional<T> lower_median(std::vector<std::optional<T>> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  return v.empty() ? std::nullopt : v[(v.size() - 1) / 2];
}

inline long lower_median(std::vector<long> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0 : v[(v.size() - 1) / 2];
}

inline std::string opt_str(const std::optional<long>& v) { return v ? std::to_string(*v) : "NA"; }

template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < std::min<std::size_t>(jobs, count); ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline constexpr std::string_view kSummaryHeader =
    "objective,dim,cell,algorithm,transform,goal,lr,starts,converged,diverged,median_start,final_f,"
    "iterations,iters_to_tol,iters_to_target,value_evals,gradient_evals,hessian_evals";

inline std::string format_summary_row(const std::string& objective, Index dim, const CellSummary& c) {
  std::string s = objective + "," + std::to_string(dim) + "," + c.label + "," +
                  std::string(to_string(c.algorithm)) + "," + std::string(to_string(c.transform)) +
                  "," + (c.goal == Goal::Minimize ? "min" : "max") + "," + csv::format_double(c.lr) +
                  "," + std::to_string(c.starts) + "," + std::to_string(c.converged) + "," +
                  std::to_string(c.diverged) + "," + std::to_string(c.median_start) + "," +
                  csv::format_double(c.final_f) + "," + std::to_string(c.iterations) + "," +
                  detail::opt_str(c.iters_to_tol) + "," + detail::opt_str(c.iters_to_target) + "," +
                  std::to_string(c.value_evals) + "," + std::to_string(c.gradient_evals) + "," +
                  std::to_string(c.hessian_evals);
  return s;
}

inline std::string trace_file_name(const std::string& label, long start) {
  return label + "__s" + std::to_string(start) + ".csv";
}

/// Runs every (cell, start) pair and writes
///   <output_dir>/<objective>/<label>__s<k>.csv   one trace per run
///   <output_dir>/<objective>/summary.csv         one row per cell
/// Output bytes depend only on the config, not on `jobs`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1) {
  const Objective obj = make_objective(cfg.objective);
  const std::vector<Vector> starts = make_starts(cfg.starts, obj);
  detail::require(!cfg.cells.empty() && !starts.empty(), "run_experiment: need at least one cell and one start");
  for (const auto& s : starts)
    detail::require(s.size() == obj.dim(), "run_experiment: start has wrong dimension");

  ExperimentResult result;
  result.objective = cfg.objective.name;
  result.dim = obj.dim();
  result.directory = std::filesystem::path(cfg.output_dir) / cfg.objective.name;
  std::filesystem::create_directories(result.directory);

  const std::size_t n_runs = cfg.cells.size() * starts.size();
  result.runs.resize(n_runs);
  RunOptions opts;
  opts.wall_clock = cfg.wall_clock;

  detail::parallel_for(n_runs, jobs, [&](std::size_t idx) {
    const std::size_t ci = idx / starts.size();
    const long si = static_cast<long>(idx % starts.size());
    const CellSpec& cell = cfg.cells[ci];
    const RunResult r = run(obj, cell.config, starts[si], cell.goal, opts);
    RunSummary& s = result.runs[idx];
    s.cell = cell.label;
    s.start = si;
    s.status = r.status;
    s.final_f = r.trace.back().f;
    s.iterations = r.iterations;
    s.iters_to_tol = r.iters_to_tol;
    s.iters_to_target = r.iters_to_target;
    s.evals = r.evals;
    s.trace_file = (result.directory / trace_file_name(cell.label, si)).string();
    write_trace_csv(r.trace, s.trace_file);
  });

  for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
    const CellSpec& cell = cfg.cells[ci];
    CellSummary c;
    c.label = cell.label;
    c.algorithm = cell.config.algorithm;
    c.transform = cell.config.transform;
    c.goal = cell.goal;
    c.lr = cell.config.lr;
    c.starts = static_cast<long>(starts.size());
    std::vector<std::pair<double, long>> finals;
    std::vector<long> iters, vals, grads, hess;
    std::vector<std::optional<long>> to_tol, to_target;
    for (std::size_t si = 0; si < starts.size(); ++si) {
      const RunSummary& s = result.runs[ci * starts.size() + si];
      c.converged += s.status == RunStatus::Converged;
      c.diverged += s.status == RunStatus::Diverged;
      // Minimization ranks low f first; NaN ranks last either way.
      const double key = cell.goal == Goal::Minimize ? s.final_f : -s.final_f;
      finals.emplace_back(std::isnan(key) ? std::numeric_limits<double>::infinity() : key, s.start);
      iters.push_back(s.iterations);
      vals.push_back(s.evals.value);
      grads.push_back(s.evals.gradient);
      hess.push_back(s.evals.hessian);
      to_tol.push_back(s.iters_to_tol);
      to_target.push_back(s.iters_to_target);
    }
    std::sort(finals.begin(), finals.end());
    c.median_start = finals[(finals.size() - 1) / 2].second;
    c.final_f = result.runs[ci * starts.size() + static_cast<std::size_t>(c.median_start)].final_f;
    c.iterations = detail::lower_median(iters);
    c.iters_to_tol = detail::lower_median(to_tol);
    c.iters_to_target = detail::lower_median(to_target);
    c.value_evals = detail::lower_median(vals);
    c.gradient_evals = detail::lower_median(grads);
    c.hessian_evals = detail::lower_median(hess);
    result.cells.push_back(c);
  }

  std::ofstream out(result.directory / "summary.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write summary in " + result.directory.string());
  out << kSummaryHeader << '\n';
  for (const auto& c : result.cells) out << format_summary_row(result.objective, result.dim, c) << '\n';
  return result;
}

/// Iteration budget of the built-in suite; vanilla Adam at alpha = 0.001 needs
/// about 16k iterations to bring Rosenbrock below 1e-6.
inline constexpr long kBenchMaxIters = 20000;

/// Default comparison suite: every benchmark against
/// {bfgs, adam, qqg-adam, adagrad, qqg-adagrad, sqg-nag}, 3 seeded starts.
/// f_target is the known global minimum + 1e-6 where one exists.
inline std::vector<ExperimentConfig> default_bench_suite(std::uint64_t seed = 42,
                                                         const std::string& output_dir = "bench_out") {
  struct Entry {
    Benchmark b;
    Index dim;
  };
  const Entry entries[] = {
      {Benchmark::Sphere, 10},      {Benchmark::SumOfPowers, 5}, {Benchmark::Rosenbrock, 2},
      {Benchmark::Rastrigin, 2},    {Benchmark::MonkeySaddle, 2}, {Benchmark::Himmelblau, 2},
      {Benchmark::SixHumpCamel, 2}, {Benchmark::Beale, 2},
  };
  const std::pair<Algorithm, Transform> cells[] = {
      {Algorithm::BFGS, Transform::Vanilla},    {Algorithm::Adam, Transform::Vanilla},
      {Algorithm::Adam, Transform::QQG},        {Algorithm::AdaGrad, Transform::Vanilla},
      {Algorithm::AdaGrad, Transform::QQG},     {Algorithm::NAG, Transform::SQG},
  };
  std::vector<ExperimentConfig> suite;
  for (const auto& e : entries) {
    ExperimentConfig cfg;
    cfg.objective.name = std::string(to_string(e.b));
    cfg.objective.dim = e.dim;
    cfg.starts.count = 3;
    cfg.starts.seed = seed;
    cfg.output_dir = output_dir;
    const Objective obj = make_benchmark(e.b, e.dim);
    std::optional<double> target;
    if (!obj.known_minima().empty()) {
      double best = obj.known_minima().front().value;
      for (const auto& m : obj.known_minima()) best = std::min(best, m.value);
      target = best + 1e-6;
    }
    for (const auto& [a, t] : cells) {
      CellSpec c;
      c.label = default_label(a, t);
      c.config = make_config(a, t);
      c.config.f_target = target;
      c.config.max_iters = kBenchMaxIters;
      cfg.cells.push_back(c);
    }
    suite.push_back(std::move(cfg));
  }
  return suite;
}

inline std::string format_bench_summary(const std::vector<ExperimentResult>& results) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& r : results)
    for (const auto& c : r.cells) out += format_summary_row(r.objective, r.dim, c) + "\n";
  return out;
}

/// Runs the default suite and writes <output_dir>/summary.csv covering every
/// objective and cell.
inline std::vector<ExperimentResult> run_bench(const std::vector<ExperimentConfig>& suite,
                                               const std::string& output_dir, unsigned jobs = 1) {
  std::vector<ExperimentResult> results;
  for (const auto& cfg : suite) results.push_back(run_experiment(cfg, jobs));
  std::filesystem::create_directories(output_dir);
  std::ofstream out(std::filesystem::path(output_dir) / "summary.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write bench summary in " + output_dir);
  out << format_bench_summary(results);
  return results;
}

}  // namespace qqg
