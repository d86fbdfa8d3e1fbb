#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "qqg/bfgs.hpp"
#include "qqg/errors.hpp"
#include "qqg/linesearch.hpp"
#include "qqg/numerics.hpp"

namespace qqg {

enum class Algorithm { GD, NAG, AdaGrad, Adam, BFGS };
enum class Transform { Vanilla, OQG, SQG, QQG };
enum class Goal { Minimize, Maximize };
enum class ScalingSchedule { Dynamic, Fixed };

/// Standard accelerated-gradient momentum: lambda_0 = 0,
/// lambda_{t+1} = (1 + sqrt(1 + 4 lambda_t^2)) / 2,
/// gamma_t = (1 - lambda_t) / lambda_{t+1}.
struct LambdaRecursion {};
struct FixedGamma {
  double gamma = 0.0;
};
using NagSchedule = std::variant<LambdaRecursion, FixedGamma>;

/// QQG-NAG step size eta_t = min(1, eta_min + delta * t).
struct WarmUp {
  double eta_min = 0.01;
  double delta = 0.01;
};
/// QQG-NAG step size from a backtracking search along -G_qq.
struct LineSearchStep {};
using QqgNagStep = std::variant<WarmUp, LineSearchStep>;

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::GD: return "gd";
    case Algorithm::NAG: return "nag";
    case Algorithm::AdaGrad: return "adagrad";
    case Algorithm::Adam: return "adam";
    case Algorithm::BFGS: return "bfgs";
  }
  return "?";
}

inline std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::Vanilla: return "vanilla";
    case Transform::OQG: return "oqg";
    case Transform::SQG: return "sqg";
    case Transform::QQG: return "qqg";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::GD, Algorithm::NAG, Algorithm::AdaGrad, Algorithm::Adam, Algorithm::BFGS})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

inline std::optional<Transform> parse_transform(std::string_view s) {
  for (auto t : {Transform::Vanilla, Transform::OQG, Transform::SQG, Transform::QQG})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

/// Learning rate used when a cell does not override it.
///
///  - Adam: alpha = 0.001; QQG-Adam alpha = 0.01.
///  - AdaGrad: eta = 0.01; every enhanced variant N_t = 0.1.
///  - NAG: eta = 0.01 (vanilla); OQG/SQG use it as eta_0 in
///    N_t = 1 + eta_0 / (1 + t), default 0.5; QQG ignores it (see QqgNagStep).
///  - GD: 0.01, QQG 0.1.
///  - BFGS: unused (line search picks the step).
inline double default_lr(Algorithm a, Transform t) {
  switch (a) {
    case Algorithm::Adam: return t == Transform::QQG ? 0.01 : 0.001;
    case Algorithm::AdaGrad: return t == Transform::Vanilla ? 0.01 : 0.1;
    case Algorithm::NAG:
      if (t == Transform::OQG || t == Transform::SQG) return 0.5;
      return t == Transform::QQG ? 1.0 : 0.01;
    case Algorithm::GD: return t == Transform::QQG ? 0.1 : 0.01;
    case Algorithm::BFGS: return 1.0;
  }
  return 0.01;
}

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::GD;
  Transform transform = Transform::Vanilla;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  /// Denominator guard for AdaGrad and Adam.
  double eps_opt = 1e-8;
  NagSchedule nag_schedule = LambdaRecursion{};
  QqgNagStep qqg_nag_step = WarmUp{};
  double scaling_eps = 1e-8;
  ScalingSchedule scaling_schedule = ScalingSchedule::Dynamic;
  long max_iters = 1000;
  double grad_tol = 1e-8;
  /// Reported only: first iteration whose objective reaches this value.
  std::optional<double> f_target;
  double divergence_threshold = 1e12;
  LineSearchConfig line_search;
  BfgsOptions bfgs;
  /// Test hook: QQG keeps H at its initial value.
  bool freeze_qqg = false;

  void validate() const {
    detail::require(lr > 0.0 && std::isfinite(lr), "OptimizerConfig: lr must be positive");
    detail::require(0.0 <= beta1 && beta1 < 1.0, "OptimizerConfig: beta1 must be in [0,1)");
    detail::require(0.0 <= beta2 && beta2 < 1.0, "OptimizerConfig: beta2 must be in [0,1)");
    detail::require(eps_opt > 0.0, "OptimizerConfig: eps must be positive");
    detail::require(scaling_eps > 0.0, "OptimizerConfig: scaling eps must be positive");
    detail::require(max_iters >= 0, "OptimizerConfig: max_iters must be >= 0");
    detail::require(grad_tol >= 0.0, "OptimizerConfig: grad_tol must be >= 0");
    detail::require(algorithm != Algorithm::BFGS || transform == Transform::Vanilla,
                    "OptimizerConfig: bfgs takes no gradient transform");
    if (const auto* w = std::get_if<WarmUp>(&qqg_nag_step)) {
      detail::require(w->eta_min > 0.0 && w->delta >= 0.0,
                      "OptimizerConfig: warm-up needs eta_min > 0 and delta >= 0");
    }
    line_search.validate();
    detail::require(bfgs.init_scale > 0.0, "OptimizerConfig: bfgs scale must be positive");
  }
};

/// Config with the defaults for an (algorithm, transform) pair resolved.
inline OptimizerConfig make_config(Algorithm a, Transform t = Transform::Vanilla) {
  OptimizerConfig c;
  c.algorithm = a;
  c.transform = t;
  c.lr = default_lr(a, t);
  if (a == Algorithm::BFGS) c.line_search.strong = true;
  return c;
}

// ---------------------------------------------------------------------------
// Single steps. Minimization moves against g_eff, maximization along it.

inline double goal_sign(Goal goal) { return goal == Goal::Minimize ? -1.0 : 1.0; }

inline Vector gd_step(const Vector& x, const Vector& g_eff, double lr, Goal goal = Goal::Minimize) {
  detail::require(lr > 0.0, "gd_step: lr must be positive");
  detail::require(x.size() == g_eff.size(), "gd_step: dimension mismatch");
  return goal == Goal::Minimize ? Vector(x - lr * g_eff) : Vector(x + lr * g_eff);
}

struct NagState {
  Vector v_prev;
  double lambda = 0.0;
  long t = 0;

  static NagState init(const Vector& x0) { return {x0, 0.0, 0}; }
};

inline double nag_lambda_next(double lambda) {
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * lambda * lambda));
}

/// V_{t+1} = beta_t -/+ step * g_eff
/// beta_{t+1} = (1 - gamma_t) V_{t+1} + gamma_t V_t
inline Vector nag_step(NagState& state, const Vector& x, const Vector& g_eff, double step,
                       const NagSchedule& schedule = LambdaRecursion{},
                       Goal goal = Goal::Minimize) {
  detail::require(x.size() == g_eff.size() && x.size() == state.v_prev.size(),
                  "nag_step: dimension mismatch");
  double gamma = 0.0;
  if (const auto* fixed = std::get_if<FixedGamma>(&schedule)) {
    gamma = fixed->gamma;
  } else {
    const double lambda_t = nag_lambda_next(state.lambda);
    gamma = (1.0 - lambda_t) / nag_lambda_next(lambda_t);
    state.lambda = lambda_t;
  }
  Vector v_next = goal == Goal::Minimize ? Vector(x - step * g_eff) : Vector(x + step * g_eff);
  Vector x_next = (1.0 - gamma) * v_next + gamma * state.v_prev;
  state.v_prev = std::move(v_next);
  ++state.t;
  return x_next;
}

struct AdaGradState {
  Vector accum;
  long t = 0;

  static AdaGradState init(Index n) { return {Vector::Zero(n), 0}; }
};

/// accum += g_eff^2;  x_i -/+= lr / (eps + sqrt(accum_i)) * g_eff_i
inline Vector adagrad_step(AdaGradState& state, const Vector& x, const Vector& g_eff, double lr,
                           double eps = 1e-8, Goal goal = Goal::Minimize) {
  detail::require(x.size() == g_eff.size() && x.size() == state.accum.size(),
                  "adagrad_step: dimension mismatch");
  state.accum += g_eff.cwiseAbs2();
  ++state.t;
  const Vector step = (lr * g_eff.array() / (eps + state.accum.array().sqrt())).matrix();
  return goal == Goal::Minimize ? Vector(x - step) : Vector(x + step);
}

struct AdamState {
  Vector m;
  Vector v;
  long t = 0;

  static AdamState init(Index n) { return {Vector::Zero(n), Vector::Zero(n), 0}; }
};

/// Bias-corrected moments (m_hat, v_hat) for the current timestep.
inline std::pair<Vector, Vector> adam_corrected(const AdamState& s, double beta1, double beta2) {
  const double t = static_cast<double>(s.t);
  return {s.m / (1.0 - std::pow(beta1, t)), s.v / (1.0 - std::pow(beta2, t))};
}

inline Vector adam_step(AdamState& state, const Vector& x, const Vector& g_eff, double lr,
                        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
                        Goal goal = Goal::Minimize) {
  detail::require(x.size() == g_eff.size() && x.size() == state.m.size(),
                  "adam_step: dimension mismatch");
  ++state.t;
  state.m = beta1 * state.m + (1.0 - beta1) * g_eff;
  state.v = beta2 * state.v + (1.0 - beta2) * g_eff.cwiseAbs2();
  const auto [m_hat, v_hat] = adam_corrected(state, beta1, beta2);
  const Vector step = (lr * m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
  return goal == Goal::Minimize ? Vector(x - step) : Vector(x + step);
}

}  // namespace qqg
