#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qqg/bfgs.hpp"
#include "qqg/errors.hpp"
#include "qqg/linesearch.hpp"
#include "qqg/objective.hpp"
#include "qqg/optimizers.hpp"
#include "qqg/scaling.hpp"
#include "qqg/trace.hpp"

namespace qqg {

enum class RunStatus { Converged, MaxIterations, Diverged };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIterations: return "max_iters";
    case RunStatus::Diverged: return "diverged";
  }
  return "?";
}

struct RunDiagnostics {
  /// QQG / BFGS: iterations where g != 0 and g^T H g <= 0.
  long descent_checks = 0;
  long descent_violations = 0;
  /// BFGS driver only.
  long wolfe_steps = 0;
  long wolfe_nonpositive_sy = 0;
  long line_search_failures = 0;
  long updates_applied = 0;
  long updates_skipped = 0;
  BfgsDiagnostics bfgs;
  /// Extremes of the OQG/SQG preconditioner over the run.
  double scaler_min = std::numeric_limits<double>::quiet_NaN();
  double scaler_max = std::numeric_limits<double>::quiet_NaN();
};

struct RunResult {
  std::vector<TraceRecord> trace;
  /// Filled only when RunOptions::record_iterates is set.
  std::vector<Vector> iterates;
  Vector x;
  /// Objective value at x, in the caller's sign convention.
  double f = 0.0;
  RunStatus status = RunStatus::MaxIterations;
  long iterations = 0;
  std::optional<long> iters_to_tol;
  std::optional<long> iters_to_target;
  EvalCounts evals;
  RunDiagnostics diagnostics;
};

/// What an observer sees after the direction of iteration `iter` is formed
/// and before the step is taken. Values are in the minimization frame.
struct IterationEvent {
  long iter;
  const Vector& x;
  double f;
  const Vector& g;
  const Vector& g_eff;
  const BfgsState* bfgs;
};

struct RunOptions {
  std::function<void(const IterationEvent&)> observer;
  bool record_iterates = false;
  /// elapsed_s stays 0 unless set, which keeps trace files reproducible.
  bool wall_clock = false;
};

namespace detail {

// Shared bookkeeping for both loops.
class RunRecorder {
 public:
  RunRecorder(const OptimizerConfig& cfg, Goal goal, const RunOptions& opts)
      : cfg_(cfg), goal_(goal), opts_(opts), start_(std::chrono::steady_clock::now()) {}

  double user_f(double f_internal) const { return goal_ == Goal::Minimize ? f_internal : -f_internal; }

  void record(RunResult& r, long iter, const Vector& x, double f, const Vector& g, double step_norm,
              long ls_trials, long skipped) {
    TraceRecord rec;
    rec.iter = iter;
    rec.f = user_f(f);
    rec.grad_inf_norm = inf_norm(g);
    rec.step_norm = step_norm;
    rec.ls_trials = ls_trials;
    rec.updates_skipped = skipped;
    if (opts_.wall_clock) {
      rec.elapsed_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    r.trace.push_back(rec);
    if (opts_.record_iterates) r.iterates.push_back(x);
    if (!r.iters_to_tol && rec.grad_inf_norm <= cfg_.grad_tol) r.iters_to_tol = iter;
    if (!r.iters_to_target && cfg_.f_target) {
      const bool hit = goal_ == Goal::Minimize ? rec.f <= *cfg_.f_target : rec.f >= *cfg_.f_target;
      if (hit) r.iters_to_target = iter;
    }
  }

  bool diverged(const Vector& x, double f) const {
    return !std::isfinite(f) || !x.allFinite() || f > cfg_.divergence_threshold;
  }

 private:
  const OptimizerConfig& cfg_;
  Goal goal_;
  const RunOptions& opts_;
  std::chrono::steady_clock::time_point start_;
};

inline void finish(RunResult& r, const Vector& x, double f, const Vector& g, const OptimizerConfig& cfg,
                   Goal goal, const CountingEvaluator& ev) {
  r.x = x;
  r.f = goal == Goal::Minimize ? f : -f;
  if (r.status != RunStatus::Diverged)
    r.status = inf_norm(g) <= cfg.grad_tol ? RunStatus::Converged : RunStatus::MaxIterations;
  r.evals = ev.counts();
}

inline double fallback_alpha(double alpha, const Vector& x, const Vector& p) {
  const double floor = 1e-8 * std::max(1.0, x.norm()) / p.norm();
  return std::max(alpha, floor);
}

}  // namespace detail

/// Classic BFGS: p = -H_k g, Wolfe line search (strong per cfg), inverse
/// update on every successful search. A failed search takes the best step it
/// saw (floored at 1e-8 max(1, ||x||) / ||p||) and skips the update.
inline RunResult bfgs_optimize(const Objective& obj, const Vector& x0, const OptimizerConfig& cfg,
                               Goal goal = Goal::Minimize, const RunOptions& opts = {}) {
  cfg.validate();
  detail::require(x0.size() == obj.dim(), "bfgs_optimize: x0 has wrong dimension");
  CountingEvaluator ev(obj, goal == Goal::Maximize);
  detail::RunRecorder rec(cfg, goal, opts);
  BfgsState state(obj.dim(), cfg.bfgs);
  RunResult r;

  Vector x = x0;
  double f = ev.value(x);
  Vector g = ev.gradient(x);
  rec.record(r, 0, x, f, g, 0.0, 0, 0);
  if (rec.diverged(x, f) || !g.allFinite()) {
    r.status = RunStatus::Diverged;
    detail::finish(r, x, f, g, cfg, goal, ev);
    return r;
  }

  for (long k = 0; k < cfg.max_iters; ++k) {
    if (inf_norm(g) <= cfg.grad_tol) break;

    Vector p = -state.qqg_direction(g);
    ++r.diagnostics.descent_checks;
    if (!(g.dot(p) < 0.0)) {
      ++r.diagnostics.descent_violations;
      p = -g;
    }
    if (opts.observer) {
      const Vector g_eff = -p;
      opts.observer({k, x, f, g, g_eff, &state});
    }

    const StepResult ls = wolfe(ev, x, p, f, g, cfg.line_search);
    Vector x_new;
    double f_new;
    Vector g_new;
    if (ls.success) {
      const Vector s = ls.alpha * p;
      x_new = x + s;
      f_new = ls.f_new;
      g_new = ls.g_new;
      const Vector y = g_new - g;
      ++r.diagnostics.wolfe_steps;
      if (!(s.dot(y) > 0.0)) ++r.diagnostics.wolfe_nonpositive_sy;
      try {
        state.update(s, y);
      } catch (const NumericalError&) {
        r.status = RunStatus::Diverged;
      }
    } else {
      ++r.diagnostics.line_search_failures;
      const double alpha = detail::fallback_alpha(ls.alpha, x, p);
      x_new = x + alpha * p;
      f_new = ev.value(x_new);
      g_new = ev.gradient(x_new);
    }

    const double step_norm = (x_new - x).norm();
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    rec.record(r, k + 1, x, f, g, step_norm, ls.trials, state.updates_skipped());
    r.iterations = k + 1;
    if (r.status == RunStatus::Diverged || rec.diverged(x, f) || !g.allFinite()) {
      r.status = RunStatus::Diverged;
      break;
    }
  }

  r.diagnostics.updates_applied = state.updates_applied();
  r.diagnostics.updates_skipped = state.updates_skipped();
  r.diagnostics.bfgs = state.diagnostics();
  detail::finish(r, x, f, g, cfg, goal, ev);
  return r;
}

/// Runs the configured algorithm. Each iteration forms g_eff from the
/// gradient through the transform (vanilla, OQG/SQG preconditioner, or the
/// quasi-quadratic gradient H_k g after observing (x, g)), then applies the
/// algorithm's step. Maximization runs as minimization of the negated
/// objective, which gives exactly the ascent rules x + eta G.
inline RunResult run(const Objective& obj, const OptimizerConfig& cfg, const Vector& x0,
                     Goal goal = Goal::Minimize, const RunOptions& opts = {}) {
  if (cfg.algorithm == Algorithm::BFGS) return bfgs_optimize(obj, x0, cfg, goal, opts);

  cfg.validate();
  detail::require(x0.size() == obj.dim(), "run: x0 has wrong dimension");
  const bool scaled = cfg.transform == Transform::OQG || cfg.transform == Transform::SQG;
  const bool dynamic_scaling = scaled && cfg.scaling_schedule == ScalingSchedule::Dynamic;
  if (dynamic_scaling) {
    detail::require(obj.has_hessian(), "run: " + std::string(to_string(cfg.transform)) +
                                           " needs a Hessian; '" + obj.name() + "' has none");
  } else if (scaled) {
    detail::require(obj.has_hessian() || obj.fixed_bound().has_value(),
                    "run: fixed scaling needs a Hessian or fixed bound on '" + obj.name() + "'");
  }
  const ScalingMode scaling_mode =
      cfg.transform == Transform::OQG ? ScalingMode::OQG : ScalingMode::SQG;

  CountingEvaluator ev(obj, goal == Goal::Maximize);
  detail::RunRecorder rec(cfg, goal, opts);
  RunResult r;
  const Index n = obj.dim();

  Vector x = x0;
  double f = ev.value(x);
  Vector g = ev.gradient(x);
  std::optional<SymMatrix> hess;
  if (dynamic_scaling) hess = ev.hessian(x);

  std::optional<ScalingMatrix> fixed_scaler;
  if (scaled && !dynamic_scaling) {
    // The bound is sign-free (absolute values), so the stored bound serves
    // both goals.
    fixed_scaler = build_scaling(scaling_mode,
                                 obj.fixed_bound() ? *obj.fixed_bound() : ev.hessian(x),
                                 cfg.scaling_eps);
  }

  std::optional<BfgsState> bfgs;
  if (cfg.transform == Transform::QQG) {
    bfgs.emplace(n, cfg.bfgs);
    bfgs->set_frozen(cfg.freeze_qqg);
  }
  NagState nag = NagState::init(x0);
  AdaGradState adagrad = AdaGradState::init(n);
  AdamState adam = AdamState::init(n);

  auto skipped = [&] { return bfgs ? bfgs->updates_skipped() : 0L; };
  auto note_scaler = [&](const ScalingMatrix& s) {
    auto& d = r.diagnostics;
    d.scaler_min = std::isnan(d.scaler_min) ? s.min_entry() : std::min(d.scaler_min, s.min_entry());
    d.scaler_max = std::isnan(d.scaler_max) ? s.max_entry() : std::max(d.scaler_max, s.max_entry());
  };

  rec.record(r, 0, x, f, g, 0.0, 0, 0);
  if (rec.diverged(x, f) || !g.allFinite()) r.status = RunStatus::Diverged;

  for (long t = 0; t < cfg.max_iters && r.status != RunStatus::Diverged; ++t) {
    if (inf_norm(g) <= cfg.grad_tol) break;

    Vector g_eff;
    switch (cfg.transform) {
      case Transform::Vanilla:
        g_eff = g;
        break;
      case Transform::OQG:
      case Transform::SQG: {
        const ScalingMatrix s =
            dynamic_scaling ? build_scaling(scaling_mode, *hess, cfg.scaling_eps) : *fixed_scaler;
        note_scaler(s);
        g_eff = s.apply(g);
        break;
      }
      case Transform::QQG:
        try {
          bfgs->observe(x, g);
        } catch (const NumericalError&) {
          // Non-finite pair: keep the previous model.
        }
        g_eff = bfgs->qqg_direction(g);
        if (g.squaredNorm() > 0.0) {
          ++r.diagnostics.descent_checks;
          if (!(g.dot(g_eff) > 0.0)) ++r.diagnostics.descent_violations;
        }
        break;
    }
    if (opts.observer) opts.observer({t, x, f, g, g_eff, bfgs ? &*bfgs : nullptr});

    long ls_trials = 0;
    Vector x_new;
    switch (cfg.algorithm) {
      case Algorithm::GD:
        x_new = gd_step(x, g_eff, cfg.lr);
        break;
      case Algorithm::NAG: {
        double step = cfg.lr;
        if (cfg.transform == Transform::OQG || cfg.transform == Transform::SQG) {
          step = 1.0 + cfg.lr / (1.0 + static_cast<double>(t));
        } else if (cfg.transform == Transform::QQG) {
          if (const auto* w = std::get_if<WarmUp>(&cfg.qqg_nag_step)) {
            step = std::min(1.0, w->eta_min + w->delta * static_cast<double>(t));
          } else {
            const Vector p = -g_eff;
            if (g.dot(p) < 0.0) {
              LineSearchConfig ls_cfg = cfg.line_search;
              ls_cfg.alpha0 = 1.0;
              const StepResult ls = backtracking(ev, x, p, f, g, ls_cfg);
              ls_trials = ls.trials;
              step = ls.success ? ls.alpha : detail::fallback_alpha(ls.alpha, x, p);
            } else {
              step = WarmUp{}.eta_min;
            }
          }
        }
        x_new = nag_step(nag, x, g_eff, step, cfg.nag_schedule);
        break;
      }
      case Algorithm::AdaGrad:
        x_new = adagrad_step(adagrad, x, g_eff, cfg.lr, cfg.eps_opt);
        break;
      case Algorithm::Adam:
        x_new = adam_step(adam, x, g_eff, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_opt);
        break;
      case Algorithm::BFGS:
        break;
    }

    const double step_norm = (x_new - x).norm();
    x = std::move(x_new);
    r.iterations = t + 1;
    if (!x.allFinite()) {
      f = std::numeric_limits<double>::quiet_NaN();
      g = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
      rec.record(r, t + 1, x, f, g, step_norm, ls_trials, skipped());
      r.status = RunStatus::Diverged;
      break;
    }
    f = ev.value(x);
    g = ev.gradient(x);
    if (dynamic_scaling && std::isfinite(f) && g.allFinite()) hess = ev.hessian(x);
    rec.record(r, t + 1, x, f, g, step_norm, ls_trials, skipped());
    if (rec.diverged(x, f) || !g.allFinite()) r.status = RunStatus::Diverged;
  }

  if (bfgs) {
    r.diagnostics.updates_applied = bfgs->updates_applied();
    r.diagnostics.updates_skipped = bfgs->updates_skipped();
    r.diagnostics.bfgs = bfgs->diagnostics();
  }
  detail::finish(r, x, f, g, cfg, goal, ev);
  return r;
}

}  // namespace qqg
