#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qqg/benchmarks.hpp"
#include "qqg/bfgs.hpp"
#include "qqg/finite_diff.hpp"
#include "qqg/logistic.hpp"
#include "qqg/random.hpp"
#include "qqg/run.hpp"
#include "qqg/scaling.hpp"

namespace qqg {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The 8 benchmarks at their default dimensions plus the synthetic logistic
/// model.
inline std::vector<Objective> check_objectives() {
  std::vector<Objective> out;
  for (Benchmark b : kAllBenchmarks) {
    const Index n = b == Benchmark::Sphere ? 10 : b == Benchmark::SumOfPowers ? 5 : 2;
    out.push_back(make_benchmark(b, n));
  }
  out.push_back(make_logistic(make_synthetic_logistic()));
  return out;
}

/// Analytic vs. central-difference derivatives at `points` uniform draws from
/// each objective's domain box.
inline std::vector<CheckResult> check_derivatives(std::uint64_t seed = 42, int points = 100,
                                                  double grad_tol = 1e-5, double hess_tol = 1e-4) {
  std::vector<CheckResult> out;
  Rng rng(seed);
  for (const Objective& obj : check_objectives()) {
    double worst_g = 0.0;
    double worst_h = 0.0;
    for (int i = 0; i < points; ++i) {
      const Vector x = rng.uniform_vector(obj.domain_box()->lower, obj.domain_box()->upper);
      worst_g = std::max(worst_g, relative_error(obj.gradient(x), finite_diff_gradient(obj, x)));
      if (obj.has_hessian())
        worst_h = std::max(worst_h, relative_error(obj.hessian(x), finite_diff_hessian(obj, x)));
    }
    std::ostringstream d;
    d << "max gradient err " << worst_g << ", max hessian err " << worst_h;
    out.push_back({"derivatives/" + obj.name(), worst_g < grad_tol && worst_h < hess_tol, d.str()});
  }
  return out;
}

/// BFGS invariants on random SPD quadratics: SPD after every update, secant
/// residual, direct/inverse agreement, finite termination with exact steps.
inline CheckResult check_bfgs_quadratics(std::uint64_t seed = 42) {
  Rng rng(seed);
  long failures = 0;
  double worst_secant = 0.0;
  double worst_mismatch = 0.0;
  for (Index n : {2, 5, 10}) {
    for (int rep = 0; rep < 5; ++rep) {
      DenseMatrix M(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) M(i, j) = rng.normal();
      const DenseMatrix A = M * M.transpose() + static_cast<double>(n) * DenseMatrix::Identity(n, n);
      const SymMatrix As = SymMatrix::from_lower(A);
      BfgsOptions o;
      o.verify = true;
      BfgsState st(n, o);
      Vector x = rng.normal_vector(n);
      Vector g = A * x;
      bool done = false;
      for (Index k = 0; k <= n && !done; ++k) {
        const Vector p = -st.qqg_direction(g);
        const double alpha = exact_quadratic(As, g, p);
        const Vector s = alpha * p;
        const Vector g_new = g + A * s;
        st.update(s, g_new - g);
        x += s;
        g = g_new;
        done = g.norm() <= 1e-8;
      }
      if (!done) ++failures;
      if (!is_spd(st.inverse_hessian())) ++failures;
      failures += st.diagnostics().spd_failures;
      worst_secant = std::max(worst_secant, st.diagnostics().max_secant_residual);
      worst_mismatch = std::max(worst_mismatch, st.diagnostics().max_inverse_mismatch / static_cast<double>(n));
    }
  }
  std::ostringstream d;
  d << failures << " failures, secant " << worst_secant << ", mismatch/n " << worst_mismatch;
  return {"bfgs/quadratics", failures == 0 && worst_secant <= 1e-10 && worst_mismatch <= 1e-8, d.str()};
}

/// Preconditioner shape: SQG at the monkey-saddle point (1e-3, 0) magnifies
/// the gradient by 1 / (6e-3 + eps).
inline CheckResult check_saddle_scaling() {
  const Objective obj = make_benchmark(Benchmark::MonkeySaddle, 2);
  Vector x(2);
  x << 1e-3, 0.0;
  const Vector g = obj.gradient(x);
  const ScalingMatrix s = build_sqg(obj.hessian(x), 1e-8);
  const double ratio = s.apply(g).norm() / g.norm();
  std::ostringstream d;
  d << "gain " << ratio;
  return {"scaling/monkey_saddle", ratio >= 100.0, d.str()};
}

/// Minimizing f and maximizing -f produce the same iterates bit for bit.
inline CheckResult check_goal_symmetry() {
  const Objective f = make_benchmark(Benchmark::Rosenbrock, 2);
  const Objective neg("neg_rosenbrock", 2, [&](const Vector& x) { return -f.value(x); },
                      [&](const Vector& x) { return Vector(-f.gradient(x)); });
  Vector x0(2);
  x0 << -1.2, 1.0;
  bool same = true;
  for (Algorithm a : {Algorithm::GD, Algorithm::NAG, Algorithm::AdaGrad, Algorithm::Adam, Algorithm::BFGS}) {
    OptimizerConfig c = make_config(a, a == Algorithm::BFGS ? Transform::Vanilla : Transform::QQG);
    c.max_iters = 50;
    RunOptions o;
    o.record_iterates = true;
    const RunResult lo = run(f, c, x0, Goal::Minimize, o);
    const RunResult hi = run(neg, c, x0, Goal::Maximize, o);
    same = same && lo.iterates == hi.iterates;
  }
  return {"optimizers/goal_symmetry", same, same ? "identical iterates" : "iterates differ"};
}

inline std::vector<CheckResult> run_self_checks(std::uint64_t seed = 42) {
  std::vector<CheckResult> out = check_derivatives(seed);
  out.push_back(check_bfgs_quadratics(seed));
  out.push_back(check_saddle_scaling());
  out.push_back(check_goal_symmetry());
  return out;
}

}  // namespace qqg
