#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "qqg/benchmarks.hpp"
#include "qqg/errors.hpp"
#include "qqg/optimizers.hpp"

namespace qqg {

/// Which objective an experiment runs on. `name` is a benchmark name or
/// "logistic"; the logistic fields are ignored otherwise.
struct ObjectiveSpec {
  std::string name;
  Index dim = 2;
  Index samples = 200;
  Index features = 8;
  std::uint64_t data_seed = 7;
  std::optional<std::string> data_csv;
};

struct CellSpec {
  std::string label;
  OptimizerConfig config;
  Goal goal = Goal::Minimize;
};

/// Explicit start points, or `count` points drawn from the objective's
/// domain box with `seed`.
struct StartSpec {
  std::vector<Vector> points;
  long count = 1;
  std::uint64_t seed = 42;
};

struct ExperimentConfig {
  ObjectiveSpec objective;
  std::vector<CellSpec> cells;
  StartSpec starts;
  std::string output_dir = "out";
  bool wall_clock = false;
};

/// Command-line overrides applied on top of a parsed config.
struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<long> max_iters;
  std::optional<double> grad_tol;
  std::optional<bool> wall_clock;
  std::optional<bool> verify;
};

inline void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.seed) cfg.starts.seed = *o.seed;
  if (o.wall_clock) cfg.wall_clock = *o.wall_clock;
  for (auto& cell : cfg.cells) {
    if (o.max_iters) cell.config.max_iters = *o.max_iters;
    if (o.grad_tol) cell.config.grad_tol = *o.grad_tol;
    if (o.verify) cell.config.bfgs.verify = *o.verify;
  }
}

inline std::string default_label(Algorithm a, Transform t) {
  if (t == Transform::Vanilla) return std::string(to_string(a));
  return std::string(to_string(t)) + "-" + std::string(to_string(a));
}

namespace detail {

class TableReader {
 public:
  TableReader(const toml::table& table, std::string context)
      : table_(table), context_(std::move(context)) {}

  void allow(std::initializer_list<std::string_view> keys) {
    for (auto k : keys) allowed_.insert(std::string(k));
  }

  /// Throws on any key not passed to allow().
  void reject_unknown() const {
    for (const auto& [key, node] : table_) {
      if (!allowed_.count(std::string(key.str())))
        fail("unknown key '" + std::string(key.str()) + "'", node.source().begin.line);
    }
  }

  std::optional<std::string> str(std::string_view key) const {
    const auto* node = table_.get(key);
    if (!node) return std::nullopt;
    if (auto v = node->value<std::string>()) return *v;
    fail("'" + std::string(key) + "' must be a string", node->source().begin.line);
  }

  std::optional<double> num(std::string_view key) const {
    const auto* node = table_.get(key);
    if (!node) return std::nullopt;
    if (node->is_floating_point()) return *node->value<double>();
    if (node->is_integer()) return static_cast<double>(*node->value<std::int64_t>());
    fail("'" + std::string(key) + "' must be a number", node->source().begin.line);
  }

  std::optional<std::int64_t> integer(std::string_view key) const {
    const auto* node = table_.get(key);
    if (!node) return std::nullopt;
    if (auto v = node->value_exact<std::int64_t>()) return *v;
    fail("'" + std::string(key) + "' must be an integer", node->source().begin.line);
  }

  std::optional<bool> boolean(std::string_view key) const {
    const auto* node = table_.get(key);
    if (!node) return std::nullopt;
    if (auto v = node->value_exact<bool>()) return *v;
    fail("'" + std::string(key) + "' must be true or false", node->source().begin.line);
  }

  const toml::node* node(std::string_view key) const { return table_.get(key); }

  [[noreturn]] void fail(const std::string& msg, std::uint32_t line = 0) const {
    std::string where = context_;
    if (line > 0) where += " (line " + std::to_string(line) + ")";
    throw ConfigError(where + ": " + msg);
  }

  std::uint32_t line() const { return table_.source().begin.line; }

 private:
  const toml::table& table_;
  std::string context_;
  std::set<std::string> allowed_;
};

inline const toml::table* sub_table(const toml::table& root, std::string_view key) {
  const auto* node = root.get(key);
  if (!node) return nullptr;
  if (!node->is_table())
    throw ConfigError("[" + std::string(key) + "] (line " + std::to_string(node->source().begin.line) +
                      "): must be a table");
  return node->as_table();
}

inline bool valid_label(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '+' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline CellSpec parse_cell(const toml::table& t, std::size_t index) {
  TableReader r(t, "cell[" + std::to_string(index) + "]");
  r.allow({"algorithm", "transform", "label", "goal", "lr", "beta1", "beta2", "eps", "nag_schedule",
           "nag_gamma", "qqg_nag_step", "eta_min", "delta", "scaling", "scaling_eps", "line_search",
           "c1", "c2", "rho", "max_trials", "bfgs_scale", "bfgs_rescale", "verify", "max_iters",
           "grad_tol", "f_target"});
  r.reject_unknown();

  const auto alg_name = r.str("algorithm");
  if (!alg_name) r.fail("missing 'algorithm'", r.line());
  const auto alg = parse_algorithm(*alg_name);
  if (!alg) r.fail("unknown algorithm '" + *alg_name + "' (gd, nag, adagrad, adam, bfgs)");
  Transform transform = Transform::Vanilla;
  if (auto tn = r.str("transform")) {
    auto parsed = parse_transform(*tn);
    if (!parsed) r.fail("unknown transform '" + *tn + "' (vanilla, oqg, sqg, qqg)");
    transform = *parsed;
  }
  if (*alg == Algorithm::BFGS && transform != Transform::Vanilla)
    r.fail("bfgs takes no gradient transform");

  CellSpec cell;
  cell.config = make_config(*alg, transform);
  cell.label = r.str("label").value_or(default_label(*alg, transform));
  if (!valid_label(cell.label))
    r.fail("label '" + cell.label + "' may only contain letters, digits, '-', '_', '+', '.'");
  OptimizerConfig& c = cell.config;

  if (auto g = r.str("goal")) {
    if (*g == "min") cell.goal = Goal::Minimize;
    else if (*g == "max") cell.goal = Goal::Maximize;
    else r.fail("goal must be 'min' or 'max'");
  }
  if (auto v = r.num("lr")) c.lr = *v;
  if (auto v = r.num("beta1")) c.beta1 = *v;
  if (auto v = r.num("beta2")) c.beta2 = *v;
  if (auto v = r.num("eps")) c.eps_opt = *v;

  const auto schedule = r.str("nag_schedule").value_or("lambda");
  if (schedule == "lambda") {
    if (r.node("nag_gamma")) r.fail("'nag_gamma' requires nag_schedule = \"fixed\"");
    c.nag_schedule = LambdaRecursion{};
  } else if (schedule == "fixed") {
    const auto gamma = r.num("nag_gamma");
    if (!gamma) r.fail("nag_schedule = \"fixed\" requires 'nag_gamma'");
    c.nag_schedule = FixedGamma{*gamma};
  } else {
    r.fail("nag_schedule must be 'lambda' or 'fixed'");
  }

  const auto qstep = r.str("qqg_nag_step").value_or("warmup");
  if (qstep == "warmup") {
    WarmUp w;
    if (auto v = r.num("eta_min")) w.eta_min = *v;
    if (auto v = r.num("delta")) w.delta = *v;
    c.qqg_nag_step = w;
  } else if (qstep == "line_search") {
    c.qqg_nag_step = LineSearchStep{};
  } else {
    r.fail("qqg_nag_step must be 'warmup' or 'line_search'");
  }

  if (auto s = r.str("scaling")) {
    if (*s == "dynamic") c.scaling_schedule = ScalingSchedule::Dynamic;
    else if (*s == "fixed") c.scaling_schedule = ScalingSchedule::Fixed;
    else r.fail("scaling must be 'dynamic' or 'fixed'");
  }
  if (auto v = r.num("scaling_eps")) c.scaling_eps = *v;

  if (auto ls = r.str("line_search")) {
    if (*ls == "wolfe") c.line_search.strong = false;
    else if (*ls == "strong_wolfe") c.line_search.strong = true;
    else r.fail("line_search must be 'wolfe' or 'strong_wolfe'");
  }
  if (auto v = r.num("c1")) c.line_search.c1 = *v;
  if (auto v = r.num("c2")) c.line_search.c2 = *v;
  if (auto v = r.num("rho")) c.line_search.rho = *v;
  if (auto v = r.integer("max_trials")) c.line_search.max_trials = static_cast<int>(*v);
  if (auto v = r.num("bfgs_scale")) c.bfgs.init_scale = *v;
  if (auto v = r.boolean("bfgs_rescale")) c.bfgs.rescale_first = *v;
  if (auto v = r.boolean("verify")) c.bfgs.verify = *v;
  if (auto v = r.integer("max_iters")) c.max_iters = *v;
  if (auto v = r.num("grad_tol")) c.grad_tol = *v;
  if (auto v = r.num("f_target")) c.f_target = *v;

  try {
    c.validate();
  } catch (const ContractViolation& e) {
    r.fail(std::string("'") + cell.label + "': " + e.what());
  }
  return cell;
}

inline Vector parse_point(const toml::node& node, const std::string& context) {
  const auto* arr = node.as_array();
  if (!arr || arr->empty()) throw ConfigError(context + ": start point must be a non-empty array");
  Vector v(static_cast<Index>(arr->size()));
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto& e = *arr->get(i);
    if (e.is_floating_point()) v[static_cast<Index>(i)] = *e.value<double>();
    else if (e.is_integer()) v[static_cast<Index>(i)] = static_cast<double>(*e.value<std::int64_t>());
    else throw ConfigError(context + ": start point entries must be numbers");
  }
  return v;
}

}  // namespace detail

/// Parses an experiment from TOML text. `origin` names the source in errors.
///
/// Schema (all tables except [objective] and [[cell]] are optional):
///
///   [objective]  name, dim, samples, features, data_seed, data_csv
///   [starts]     count, seed, points = [[...], ...]
///   [stopping]   max_iters, grad_tol, f_target   (defaults for every cell)
///   [output]     dir, wall_clock
///   [[cell]]     algorithm, transform, label, goal, lr, beta1, beta2, eps,
///                nag_schedule, nag_gamma, qqg_nag_step, eta_min, delta,
///                scaling, scaling_eps, line_search, c1, c2, rho, max_trials,
///                bfgs_scale, bfgs_rescale, verify, max_iters, grad_tol, f_target
inline ExperimentConfig parse_config_string(std::string_view text, const std::string& origin = "<config>") {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.source().begin.line) + ": parse error: " +
                      std::string(e.description()));
  }

  detail::TableReader top(root, origin);
  top.allow({"objective", "starts", "stopping", "output", "cell"});
  top.reject_unknown();

  ExperimentConfig cfg;

  const auto* obj = detail::sub_table(root, "objective");
  if (!obj) throw ConfigError(origin + ": missing [objective] table");
  {
    detail::TableReader r(*obj, "[objective]");
    r.allow({"name", "dim", "samples", "features", "data_seed", "data_csv"});
    r.reject_unknown();
    auto name = r.str("name");
    if (!name) r.fail("missing 'name'", r.line());
    cfg.objective.name = *name;
    if (auto v = r.integer("dim")) cfg.objective.dim = static_cast<Index>(*v);
    if (auto v = r.integer("samples")) cfg.objective.samples = static_cast<Index>(*v);
    if (auto v = r.integer("features")) cfg.objective.features = static_cast<Index>(*v);
    if (auto v = r.integer("data_seed")) cfg.objective.data_seed = static_cast<std::uint64_t>(*v);
    cfg.objective.data_csv = r.str("data_csv");
    if (cfg.objective.name == "logistic") {
      if (cfg.objective.samples < 1 || cfg.objective.features < 0)
        r.fail("logistic needs samples >= 1 and features >= 0");
      cfg.objective.dim = cfg.objective.features + 1;
    } else if (auto b = parse_benchmark(cfg.objective.name)) {
      if (is_two_dimensional(*b) && !obj->get("dim")) cfg.objective.dim = 2;
      try {
        (void)make_benchmark(*b, cfg.objective.dim);
      } catch (const ContractViolation& e) {
        r.fail(e.what());
      }
    } else {
      r.fail("unknown objective '" + cfg.objective.name + "'");
    }
  }

  std::optional<long> max_iters;
  std::optional<double> grad_tol, f_target;
  if (const auto* st = detail::sub_table(root, "stopping")) {
    detail::TableReader r(*st, "[stopping]");
    r.allow({"max_iters", "grad_tol", "f_target"});
    r.reject_unknown();
    max_iters = r.integer("max_iters");
    grad_tol = r.num("grad_tol");
    f_target = r.num("f_target");
  }

  if (const auto* out = detail::sub_table(root, "output")) {
    detail::TableReader r(*out, "[output]");
    r.allow({"dir", "wall_clock"});
    r.reject_unknown();
    if (auto d = r.str("dir")) cfg.output_dir = *d;
    if (auto w = r.boolean("wall_clock")) cfg.wall_clock = *w;
  }

  if (const auto* starts = detail::sub_table(root, "starts")) {
    detail::TableReader r(*starts, "[starts]");
    r.allow({"count", "seed", "points"});
    r.reject_unknown();
    if (auto v = r.integer("count")) cfg.starts.count = static_cast<long>(*v);
    if (auto v = r.integer("seed")) cfg.starts.seed = static_cast<std::uint64_t>(*v);
    if (const auto* pts = r.node("points")) {
      const auto* arr = pts->as_array();
      if (!arr) r.fail("'points' must be an array of arrays", pts->source().begin.line);
      for (std::size_t i = 0; i < arr->size(); ++i) {
        Vector p = detail::parse_point(*arr->get(i), "[starts] points[" + std::to_string(i) + "]");
        if (p.size() != cfg.objective.dim)
          r.fail("points[" + std::to_string(i) + "] has dimension " + std::to_string(p.size()) +
                 ", objective has " + std::to_string(cfg.objective.dim));
        cfg.starts.points.push_back(std::move(p));
      }
    }
    if (cfg.starts.points.empty() && cfg.starts.count < 1) r.fail("'count' must be >= 1");
  }

  const auto* cells = root.get("cell");
  if (!cells) throw ConfigError(origin + ": at least one [[cell]] is required");
  const auto* arr = cells->as_array();
  if (!arr || !arr->is_array_of_tables())
    throw ConfigError(origin + ": 'cell' must be an array of tables ([[cell]])");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto& tbl = *arr->get(i)->as_table();
    // Per-cell stopping keys take precedence over [stopping].
    CellSpec cell = detail::parse_cell(tbl, i);
    if (max_iters && !tbl.get("max_iters")) cell.config.max_iters = *max_iters;
    if (grad_tol && !tbl.get("grad_tol")) cell.config.grad_tol = *grad_tol;
    if (f_target && !tbl.get("f_target")) cell.config.f_target = *f_target;
    try {
      cell.config.validate();
    } catch (const ContractViolation& e) {
      throw ConfigError("cell[" + std::to_string(i) + "] '" + cell.label + "': " + e.what());
    }
    if (!labels.insert(cell.label).second)
      throw ConfigError("cell[" + std::to_string(i) + "]: duplicate label '" + cell.label + "'");
    cfg.cells.push_back(std::move(cell));
  }
  if (cfg.cells.empty()) throw ConfigError(origin + ": at least one [[cell]] is required");
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path);
}

}  // namespace qqg
