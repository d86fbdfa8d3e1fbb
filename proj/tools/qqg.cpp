// qqg: run optimizer comparisons from a config file or the built-in suite.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "qqg/config.hpp"
#include "qqg/experiment.hpp"
#include "qqg/selfcheck.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

struct CommonFlags {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<long> max_iters;
  std::optional<double> tol;
  unsigned jobs = 1;
  bool wall_clock = false;
  bool verify = false;

  qqg::Overrides overrides() const {
    qqg::Overrides o;
    o.output_dir = out;
    o.seed = seed;
    o.max_iters = max_iters;
    o.grad_tol = tol;
    if (wall_clock) o.wall_clock = true;
    if (verify) o.verify = true;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seed", f.seed, "Seed for random starts");
  cmd->add_option("--max-iters", f.max_iters, "Iteration budget per run")->check(CLI::NonNegativeNumber);
  cmd->add_option("--tol", f.tol, "Gradient inf-norm tolerance")->check(CLI::NonNegativeNumber);
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--wall-clock", f.wall_clock, "Record elapsed seconds in traces");
  cmd->add_flag("--verify", f.verify, "Track the direct BFGS matrix and check invariants");
}

void print_cells(const qqg::ExperimentResult& r) {
  std::cout << r.objective << " (n=" << r.dim << ")\n";
  for (const auto& c : r.cells) {
    std::cout << "  " << c.label << ": final_f " << qqg::csv::format_double(c.final_f) << ", iters "
              << c.iterations << ", to_tol " << qqg::detail::opt_str(c.iters_to_tol) << ", to_target "
              << qqg::detail::opt_str(c.iters_to_target) << ", converged " << c.converged << "/"
              << c.starts;
    if (c.diverged) std::cout << ", diverged " << c.diverged;
    std::cout << "\n";
  }
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
  qqg::ExperimentConfig cfg;
  try {
    cfg = qqg::parse_config(path);
    qqg::apply_overrides(cfg, flags.overrides());
    for (const auto& c : cfg.cells) c.config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const qqg::ExperimentResult r = qqg::run_experiment(cfg, flags.jobs);
  print_cells(r);
  std::cout << "wrote " << (r.directory / "summary.csv").string() << "\n";
  return r.any_diverged() ? kExitDiverged : kExitOk;
}

int cmd_bench(const CommonFlags& flags) {
  const std::string out = flags.out.value_or("bench_out");
  auto suite = qqg::default_bench_suite(flags.seed.value_or(42), out);
  for (auto& cfg : suite) qqg::apply_overrides(cfg, flags.overrides());
  const auto results = qqg::run_bench(suite, out, flags.jobs);
  bool diverged = false;
  for (const auto& r : results) {
    print_cells(r);
    diverged = diverged || r.any_diverged();
  }
  std::cout << "wrote " << out << "/summary.csv\n";
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_list() {
  std::cout << "objectives:\n";
  for (qqg::Benchmark b : qqg::kAllBenchmarks)
    std::cout << "  " << qqg::to_string(b) << (qqg::is_two_dimensional(b) ? "  (n = 2)" : "") << "\n";
  std::cout << "  logistic  (synthetic or CSV data, n = features + 1)\n";
  std::cout << "algorithms: gd nag adagrad adam bfgs\n";
  std::cout << "transforms: vanilla oqg sqg qqg\n";
  return kExitOk;
}

int cmd_check(std::uint64_t seed) {
  bool ok = true;
  for (const auto& c : qqg::run_self_checks(seed)) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
    ok = ok && c.pass;
  }
  return ok ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-quadratic gradient optimizer benchmarks"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a TOML config");
  run->add_option("config", config_path, "Config file")->required();
  add_common(run, run_flags);

  CommonFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Run the built-in comparison suite");
  add_common(bench, bench_flags);

  app.add_subcommand("list", "List objectives, algorithms and transforms");

  std::uint64_t check_seed = 42;
  auto* check = app.add_subcommand("check", "Run derivative and invariant self-checks");
  check->add_option("--seed", check_seed, "Seed for sample points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, run_flags);
    if (*bench) return cmd_bench(bench_flags);
    if (*check) return cmd_check(check_seed);
    return cmd_list();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
