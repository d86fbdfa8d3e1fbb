#include <cmath>

#include "qqg/benchmarks.hpp"
#include "qqg/errors.hpp"
#include "qqg/optimizers.hpp"
#include "qqg/run.hpp"
#include "qqg/scaling.hpp"
#include "support.hpp"

using namespace qqg;
using namespace qqg::testing;

namespace {

Objective no_hessian(Index n) {
  return Objective("plain", n, [](const Vector& x) { return x.squaredNorm(); },
                   [](const Vector& x) { return Vector(2.0 * x); });
}

std::vector<double> f_column(const RunResult& r) {
  std::vector<double> out;
  for (const auto& t : r.trace) out.push_back(t.f);
  return out;
}

}  // namespace

TEST(GdStep, Examples) {
  EXPECT_EQ(gd_step(vec({1, 1}), vec({2, 2}), 0.5), vec({0, 0}));
  EXPECT_EQ(gd_step(vec({1, 1}), vec({2, 2}), 0.5, Goal::Maximize), vec({2, 2}));
  EXPECT_THROW(gd_step(vec({1}), vec({1}), 0.0), ContractViolation);
  EXPECT_THROW(gd_step(vec({1}), vec({1, 2}), 0.1), ContractViolation);
}

TEST(NagLambda, Sequence) {
  EXPECT_EQ(nag_lambda_next(0.0), 1.0);
  EXPECT_DOUBLE_EQ(nag_lambda_next(1.0), 0.5 * (1.0 + std::sqrt(5.0)));
  double lambda = 0.0;
  for (int t = 0; t < 50; ++t) {
    const double next = nag_lambda_next(lambda);
    EXPECT_GT(next, lambda);
    // lambda_{t+1}^2 - lambda_{t+1} = lambda_t^2.
    EXPECT_NEAR(next * next - next, lambda * lambda, 1e-9 * next * next);
    lambda = next;
  }
}

TEST(NagStep, FirstStepIsGradientStep) {
  NagState s = NagState::init(vec({1, 2}));
  EXPECT_EQ(nag_step(s, vec({1, 2}), vec({1, 1}), 0.5), vec({0.5, 1.5}));
  EXPECT_EQ(s.t, 1);
  EXPECT_EQ(s.lambda, 1.0);
}

TEST(NagStep, SecondStepMixesMomentum) {
  NagState s = NagState::init(vec({0}));
  const Vector x1 = nag_step(s, vec({0}), vec({-1}), 1.0);
  EXPECT_EQ(x1, vec({1}));
  const double l1 = 0.5 * (1.0 + std::sqrt(5.0));
  const double gamma = (1.0 - l1) / nag_lambda_next(l1);
  const Vector x2 = nag_step(s, x1, vec({-1}), 1.0);
  EXPECT_DOUBLE_EQ(x2[0], (1.0 - gamma) * 2.0 + gamma * 1.0);
}

TEST(NagStep, ZeroGammaReducesToGd) {
  Gen gen(61);
  for (int i = 0; i < 50; ++i) {
    const Index n = gen.dim(1, 6);
    Vector x = gen.vector(n), y = x;
    NagState s = NagState::init(x);
    for (int k = 0; k < 5; ++k) {
      const Vector g = gen.vector(n);
      x = nag_step(s, x, g, 0.1, FixedGamma{0.0});
      y = gd_step(y, g, 0.1);
      EXPECT_EQ(x, y);
    }
  }
}

TEST(AdaGradStep, Examples) {
  AdaGradState s = AdaGradState::init(1);
  const Vector x1 = adagrad_step(s, vec({1}), vec({2}), 0.1);
  EXPECT_NEAR(x1[0], 0.9, 1e-8);
  EXPECT_EQ(s.accum, vec({4}));
  const Vector x2 = adagrad_step(s, x1, vec({0}), 0.1);
  EXPECT_EQ(x2, x1);
}

TEST(AdaGradStep, AccumulatorNonDecreasing) {
  Gen gen(62);
  AdaGradState s = AdaGradState::init(4);
  Vector x = gen.vector(4);
  for (int k = 0; k < 100; ++k) {
    const Vector before = s.accum;
    x = adagrad_step(s, x, gen.vector(4), 0.1);
    EXPECT_TRUE((s.accum.array() >= before.array()).all());
  }
}

TEST(AdamStep, FirstStepIsLearningRate) {
  AdamState s = AdamState::init(2);
  const Vector x1 = adam_step(s, vec({0, 0}), vec({3, -0.5}), 0.001);
  EXPECT_NEAR(x1[0], -0.001, 1e-9);
  EXPECT_NEAR(x1[1], 0.001, 1e-9);
  EXPECT_EQ(s.t, 1);
}

TEST(AdamStep, ZeroGradientIsFixed) {
  AdamState s = AdamState::init(2);
  EXPECT_EQ(adam_step(s, vec({1, 2}), vec({0, 0}), 0.001), vec({1, 2}));
}

TEST(AdamStep, BiasCorrection) {
  AdamState s = AdamState::init(1);
  adam_step(s, vec({0}), vec({2}), 0.001);
  const auto [m_hat, v_hat] = adam_corrected(s, 0.9, 0.999);
  EXPECT_NEAR(m_hat[0], 2.0, 1e-12);
  EXPECT_NEAR(v_hat[0], 4.0, 1e-12);
}

TEST(StepRules, MaximizeMirrorsMinimize) {
  Gen gen(63);
  for (int i = 0; i < 50; ++i) {
    const Index n = gen.dim(1, 5);
    const Vector x = gen.vector(n), g = gen.vector(n);
    EXPECT_EQ(gd_step(x, g, 0.1, Goal::Maximize), gd_step(x, Vector(-g), 0.1));
    AdaGradState a1 = AdaGradState::init(n), a2 = AdaGradState::init(n);
    EXPECT_EQ(adagrad_step(a1, x, g, 0.1, 1e-8, Goal::Maximize), adagrad_step(a2, x, Vector(-g), 0.1));
    AdamState m1 = AdamState::init(n), m2 = AdamState::init(n);
    EXPECT_EQ(adam_step(m1, x, g, 0.01, 0.9, 0.999, 1e-8, Goal::Maximize),
              adam_step(m2, x, Vector(-g), 0.01));
  }
}

TEST(Defaults, LearningRates) {
  EXPECT_EQ(default_lr(Algorithm::Adam, Transform::Vanilla), 0.001);
  EXPECT_EQ(default_lr(Algorithm::Adam, Transform::QQG), 0.01);
  EXPECT_EQ(default_lr(Algorithm::AdaGrad, Transform::Vanilla), 0.01);
  EXPECT_EQ(default_lr(Algorithm::AdaGrad, Transform::QQG), 0.1);
  EXPECT_EQ(default_lr(Algorithm::AdaGrad, Transform::SQG), 0.1);
  EXPECT_EQ(default_lr(Algorithm::NAG, Transform::SQG), 0.5);
  const OptimizerConfig c = make_config(Algorithm::BFGS);
  EXPECT_TRUE(c.line_search.strong);
  EXPECT_EQ(make_config(Algorithm::Adam, Transform::QQG).lr, 0.01);
}

TEST(Defaults, NamesRoundTrip) {
  for (Algorithm a : {Algorithm::GD, Algorithm::NAG, Algorithm::AdaGrad, Algorithm::Adam, Algorithm::BFGS})
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  for (Transform t : {Transform::Vanilla, Transform::OQG, Transform::SQG, Transform::QQG})
    EXPECT_EQ(parse_transform(to_string(t)), t);
  EXPECT_FALSE(parse_algorithm("sgd").has_value());
}

TEST(ConfigValidation, Rejects) {
  OptimizerConfig c;
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = {};
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = make_config(Algorithm::BFGS);
  c.transform = Transform::QQG;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = {};
  c.qqg_nag_step = WarmUp{0.0, 0.1};
  EXPECT_THROW(c.validate(), ContractViolation);
}

TEST(Run, EnhancedNagFirstStep) {
  // N_0 = 1 + 0.1 / 1 = 1.1 against S = 1 / (2 + eps) on x^2.
  OptimizerConfig c = make_config(Algorithm::NAG, Transform::SQG);
  c.lr = 0.1;
  c.max_iters = 1;
  c.grad_tol = 0.0;
  RunOptions o;
  o.record_iterates = true;
  const RunResult r = run(make_benchmark(Benchmark::Sphere, 1), c, vec({1}), Goal::Minimize, o);
  EXPECT_NEAR(r.iterates.back()[0], 1.0 - 1.1 * 2.0 / (2.0 + 1e-8), 1e-15);
}

TEST(Run, DynamicScalingNeedsHessian) {
  OptimizerConfig c = make_config(Algorithm::GD, Transform::OQG);
  EXPECT_THROW(run(no_hessian(2), c, vec({1, 1})), ContractViolation);
  c.transform = Transform::SQG;
  c.scaling_schedule = ScalingSchedule::Fixed;
  EXPECT_THROW(run(no_hessian(2), c, vec({1, 1})), ContractViolation);
  Objective bounded = no_hessian(2);
  bounded.with_fixed_bound(SymMatrix::identity(2, 2.0));
  EXPECT_NO_THROW(run(bounded, c, vec({1, 1})));
}

TEST(Run, WrongStartDimension) {
  EXPECT_THROW(run(make_benchmark(Benchmark::Sphere, 3), make_config(Algorithm::GD), vec({1, 1})),
               ContractViolation);
}

TEST(Run, QqgDirectionIsDescent) {
  for (Algorithm a : {Algorithm::GD, Algorithm::NAG, Algorithm::AdaGrad, Algorithm::Adam}) {
    for (Benchmark b : {Benchmark::Rosenbrock, Benchmark::Himmelblau, Benchmark::SixHumpCamel}) {
      OptimizerConfig c = make_config(a, Transform::QQG);
      c.max_iters = 300;
      const RunResult r = run(make_benchmark(b, 2), c, vec({0.5, -0.5}));
      EXPECT_GT(r.diagnostics.descent_checks, 0);
      EXPECT_EQ(r.diagnostics.descent_violations, 0) << to_string(a) << " " << to_string(b);
    }
  }
}

TEST(Run, DivergenceRecordedNotThrown) {
  OptimizerConfig c = make_config(Algorithm::GD);
  c.lr = 10.0;
  c.max_iters = 1000;
  const RunResult r = run(make_benchmark(Benchmark::Sphere, 2), c, vec({1, 1}));
  EXPECT_EQ(r.status, RunStatus::Diverged);
  EXPECT_LT(r.iterations, 1000);
  EXPECT_EQ(static_cast<long>(r.trace.size()), r.iterations + 1);
}

TEST(Run, ConvergedAtStartRunsNothing) {
  const RunResult r = run(make_benchmark(Benchmark::Sphere, 3), make_config(Algorithm::Adam), vec({0, 0, 0}));
  EXPECT_EQ(r.status, RunStatus::Converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.iters_to_tol, 0);
}

TEST(Run, TraceRowsAreConsistent) {
  OptimizerConfig c = make_config(Algorithm::AdaGrad, Transform::QQG);
  c.max_iters = 50;
  c.f_target = 1.0;
  const Objective f = make_benchmark(Benchmark::Rosenbrock, 2);
  const RunResult r = run(f, c, vec({-1.2, 1}));
  ASSERT_EQ(static_cast<long>(r.trace.size()), r.iterations + 1);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    EXPECT_EQ(r.trace[i].iter, static_cast<long>(i));
    EXPECT_EQ(r.trace[i].elapsed_s, 0.0);
  }
  EXPECT_EQ(r.trace.front().f, f.value(vec({-1.2, 1})));
  EXPECT_EQ(r.trace.back().f, r.f);
  if (r.iters_to_target) {
    EXPECT_LE(r.trace[static_cast<std::size_t>(*r.iters_to_target)].f, 1.0);
  }
}

TEST(Run, FrozenQqgMatchesVanilla) {
  const Objective f = make_benchmark(Benchmark::Sphere, 4);
  const Vector x0 = vec({1, -2, 0.5, 3});
  for (Algorithm a : {Algorithm::GD, Algorithm::NAG, Algorithm::AdaGrad, Algorithm::Adam}) {
    OptimizerConfig vanilla = make_config(a);
    vanilla.max_iters = 50;
    OptimizerConfig frozen = vanilla;
    frozen.transform = Transform::QQG;
    frozen.freeze_qqg = true;
    frozen.qqg_nag_step = WarmUp{vanilla.lr, 0.0};
    EXPECT_EQ(f_column(run(f, vanilla, x0)), f_column(run(f, frozen, x0))) << to_string(a);
  }
}

TEST(Run, MaximizeOfNegationMatchesMinimize) {
  const Objective f = make_benchmark(Benchmark::Rosenbrock, 2);
  const Objective neg("neg_rosenbrock", 2, [&](const Vector& x) { return -f.value(x); },
                      [&](const Vector& x) { return Vector(-f.gradient(x)); },
                      [&](const Vector& x) { return SymMatrix::from_lower(-f.hessian(x).dense()); });
  for (Algorithm a : {Algorithm::GD, Algorithm::NAG, Algorithm::AdaGrad, Algorithm::Adam, Algorithm::BFGS}) {
    for (Transform t : {Transform::Vanilla, Transform::QQG, Transform::SQG}) {
      if (a == Algorithm::BFGS && t != Transform::Vanilla) continue;
      OptimizerConfig c = make_config(a, t);
      c.max_iters = 100;
      RunOptions o;
      o.record_iterates = true;
      const RunResult lo = run(f, c, vec({-1.2, 1}), Goal::Minimize, o);
      const RunResult hi = run(neg, c, vec({-1.2, 1}), Goal::Maximize, o);
      EXPECT_EQ(lo.iterates, hi.iterates) << to_string(a) << "/" << to_string(t);
      EXPECT_EQ(lo.f, -hi.f);
    }
  }
}

TEST(Bfgs, SphereWithinDimensionPlusOne) {
  const RunResult r = run(make_benchmark(Benchmark::Sphere, 5), make_config(Algorithm::BFGS),
                          vec({1, -2, 3, 0.5, -1}));
  EXPECT_EQ(r.status, RunStatus::Converged);
  EXPECT_LE(r.iterations, 6);
}

TEST(Bfgs, RosenbrockConverges) {
  OptimizerConfig c = make_config(Algorithm::BFGS);
  c.max_iters = 200;
  const RunResult r = run(make_benchmark(Benchmark::Rosenbrock, 2), c, vec({-1.2, 1}));
  EXPECT_EQ(r.status, RunStatus::Converged);
  EXPECT_LT((r.x - vec({1, 1})).norm(), 1e-6);
  EXPECT_EQ(r.diagnostics.wolfe_nonpositive_sy, 0);
}

TEST(Bfgs, StartAtMinimum) {
  const RunResult r = run(make_benchmark(Benchmark::Rosenbrock, 2), make_config(Algorithm::BFGS), vec({1, 1}));
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.status, RunStatus::Converged);
}

TEST(Bfgs, CountsEvaluations) {
  const RunResult r = run(make_benchmark(Benchmark::Sphere, 3), make_config(Algorithm::BFGS), vec({1, 2, 3}));
  EXPECT_GE(r.evals.value, r.iterations + 1);
  EXPECT_GE(r.evals.gradient, r.iterations + 1);
  EXPECT_EQ(r.evals.hessian, 0);
}
