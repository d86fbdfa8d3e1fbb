#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "qqg/errors.hpp"
#include "qqg/numerics.hpp"
#include "qqg/objective.hpp"

namespace qqg {

struct LineSearchConfig {
  double c1 = 1e-4;
  double c2 = 0.9;
  double rho = 0.5;
  double alpha0 = 1.0;
  int max_trials = 60;
  bool strong = false;

  void validate() const {
    detail::require(0.0 < c1 && c1 < c2 && c2 < 1.0, "LineSearchConfig: need 0 < c1 < c2 < 1");
    detail::require(0.0 < rho && rho < 1.0, "LineSearchConfig: need 0 < rho < 1");
    detail::require(alpha0 > 0.0, "LineSearchConfig: need alpha0 > 0");
    detail::require(max_trials >= 1, "LineSearchConfig: need max_trials >= 1");
  }
};

struct WolfeFlags {
  bool armijo = false;
  bool curvature = false;
  bool strong_curvature = false;
};

struct StepResult {
  double alpha = 0.0;
  double f_new = 0.0;
  /// Gradient at x + alpha p. Empty when the search failed before one was
  /// evaluated at the reported alpha.
  Vector g_new;
  int trials = 0;
  WolfeFlags conditions;
  bool success = false;
};

/// Evaluates the three acceptance conditions at a trial point.
inline WolfeFlags check_conditions(double f0, double slope0, double alpha, double f_new,
                                   double slope_new, double c1, double c2) {
  WolfeFlags w;
  w.armijo = f_new <= f0 + c1 * alpha * slope0;
  w.curvature = slope_new >= c2 * slope0;
  w.strong_curvature = std::abs(slope_new) <= c2 * std::abs(slope0);
  return w;
}

namespace detail {

inline double descent_slope(const Vector& x, const Vector& p, double f0, const Vector& g0) {
  require(x.size() == p.size() && p.size() == g0.size(), "line search: dimension mismatch");
  if (!std::isfinite(f0) || !g0.allFinite())
    throw NumericalError("line search: non-finite starting value or gradient");
  const double slope = g0.dot(p);
  require(slope < 0.0, "line search: p is not a descent direction (g0^T p = " +
                           std::to_string(slope) + ")");
  return slope;
}

// Tracks the lowest finite value seen so a failed search can still report
// something useful to its caller.
struct BestTrial {
  double alpha = 0.0;
  double f = std::numeric_limits<double>::infinity();

  void offer(double a, double fa) {
    if (std::isfinite(fa) && fa < f) {
      alpha = a;
      f = fa;
    }
  }

  StepResult failure(double f0, int trials) const {
    StepResult r;
    r.trials = trials;
    r.success = false;
    if (f < f0) {
      r.alpha = alpha;
      r.f_new = f;
    } else {
      r.alpha = 0.0;
      r.f_new = f0;
    }
    return r;
  }
};

}  // namespace detail

/// Backtracking Armijo search: the first alpha0 * rho^k satisfying
/// f(x + a p) <= f0 + c1 a g0^T p.
template <Differentiable Fn>
StepResult backtracking(Fn& fn, const Vector& x, const Vector& p, double f0, const Vector& g0,
                        const LineSearchConfig& cfg = {}) {
  cfg.validate();
  const double slope0 = detail::descent_slope(x, p, f0, g0);
  detail::BestTrial best;
  double alpha = cfg.alpha0;
  for (int trial = 1; trial <= cfg.max_trials; ++trial) {
    const Vector xt = x + alpha * p;
    const double f = fn.value(xt);
    best.offer(alpha, f);
    if (std::isfinite(f) && f <= f0 + cfg.c1 * alpha * slope0) {
      StepResult r;
      r.alpha = alpha;
      r.f_new = f;
      r.g_new = fn.gradient(xt);
      r.trials = trial;
      r.conditions =
          check_conditions(f0, slope0, alpha, f, r.g_new.dot(p), cfg.c1, cfg.c2);
      r.success = true;
      return r;
    }
    alpha *= cfg.rho;
  }
  return best.failure(f0, cfg.max_trials);
}

/// Wolfe search (weak or strong per cfg.strong): expand until the
/// acceptable set is bracketed, then bisect the bracket.
template <Differentiable Fn>
StepResult wolfe(Fn& fn, const Vector& x, const Vector& p, double f0, const Vector& g0,
                 const LineSearchConfig& cfg = {}) {
  cfg.validate();
  const double slope0 = detail::descent_slope(x, p, f0, g0);
  const double armijo_slope = cfg.c1 * slope0;
  auto curvature_ok = [&](double slope) {
    return cfg.strong ? std::abs(slope) <= cfg.c2 * std::abs(slope0) : slope >= cfg.c2 * slope0;
  };

  int trials = 0;
  detail::BestTrial best;

  auto accept = [&](double alpha, double f, Vector g, double slope) {
    StepResult r;
    r.alpha = alpha;
    r.f_new = f;
    r.g_new = std::move(g);
    r.trials = trials;
    r.conditions = check_conditions(f0, slope0, alpha, f, slope, cfg.c1, cfg.c2);
    r.success = true;
    return r;
  };

  // lo always satisfies Armijo and has the lowest value seen in the bracket.
  auto zoom = [&](double lo, double f_lo, double hi) -> StepResult {
    while (trials < cfg.max_trials) {
      const double a = 0.5 * (lo + hi);
      const Vector xt = x + a * p;
      const double f = fn.value(xt);
      ++trials;
      best.offer(a, f);
      if (!std::isfinite(f) || f > f0 + a * armijo_slope || f >= f_lo) {
        hi = a;
        continue;
      }
      Vector g = fn.gradient(xt);
      const double slope = g.dot(p);
      if (curvature_ok(slope)) return accept(a, f, std::move(g), slope);
      if (slope * (hi - lo) >= 0.0) hi = lo;
      lo = a;
      f_lo = f;
    }
    return best.failure(f0, trials);
  };

  double alpha_prev = 0.0;
  double f_prev = f0;
  double alpha = cfg.alpha0;
  while (trials < cfg.max_trials) {
    const Vector xt = x + alpha * p;
    const double f = fn.value(xt);
    ++trials;
    best.offer(alpha, f);
    if (!std::isfinite(f) || f > f0 + alpha * armijo_slope || (trials > 1 && f >= f_prev)) {
      return zoom(alpha_prev, f_prev, alpha);
    }
    Vector g = fn.gradient(xt);
    const double slope = g.dot(p);
    if (curvature_ok(slope)) return accept(alpha, f, std::move(g), slope);
    if (slope >= 0.0) return zoom(alpha, f, alpha_prev);
    alpha_prev = alpha;
    f_prev = f;
    alpha *= 2.0;
  }
  return best.failure(f0, trials);
}

/// Exact minimizer of a quadratic with Hessian A along p:
/// alpha* = -(g0^T p) / (p^T A p).
inline double exact_quadratic(const SymMatrix& A, const Vector& g0, const Vector& p) {
  detail::require(A.dim() == g0.size() && g0.size() == p.size(),
                  "exact_quadratic: dimension mismatch");
  const double curvature = p.dot(A.dense() * p);
  detail::require(curvature > 0.0, "exact_quadratic: p^T A p must be positive");
  return -g0.dot(p) / curvature;
}

}  // namespace qqg
