#include <cmath>
#include <filesystem>
#include <numbers>

#include "qqg/benchmarks.hpp"
#include "qqg/errors.hpp"
#include "qqg/finite_diff.hpp"
#include "qqg/logistic.hpp"
#include "qqg/objective.hpp"
#include "support.hpp"

using namespace qqg;
using namespace qqg::testing;

namespace {

Objective bench(Benchmark b) {
  const Index n = b == Benchmark::Sphere ? 4 : b == Benchmark::SumOfPowers ? 3 : 2;
  return make_benchmark(b, n);
}

}  // namespace

TEST(Sphere, ValueAndGradient) {
  const Objective f = make_benchmark(Benchmark::Sphere, 2);
  EXPECT_EQ(f.value(vec({1, 1})), 2.0);
  EXPECT_EQ(f.gradient(vec({1, 1})), vec({2, 2}));
  EXPECT_EQ(f.hessian(vec({3, -1})).dense(), 2.0 * DenseMatrix::Identity(2, 2));
}

TEST(Rosenbrock, Examples) {
  const Objective f = make_benchmark(Benchmark::Rosenbrock, 2);
  EXPECT_EQ(f.value(vec({1, 1})), 0.0);
  EXPECT_EQ(f.gradient(vec({1, 1})), vec({0, 0}));
  EXPECT_EQ(f.value(vec({0, 0})), 1.0);
  EXPECT_EQ(f.gradient(vec({0, 0})), vec({-2, 0}));
  // 100 (1 - 1.44)^2 + 2.2^2
  EXPECT_NEAR(f.value(vec({-1.2, 1})), 24.2, 1e-12);
}

TEST(Rosenbrock, ChainedInThreeDimensions) {
  const Objective f = make_benchmark(Benchmark::Rosenbrock, 3);
  const Vector x = vec({0.5, -0.25, 2.0});
  const double expected = 100 * std::pow(-0.25 - 0.25, 2) + std::pow(1 - 0.5, 2) +
                          100 * std::pow(2.0 - 0.0625, 2) + std::pow(1 + 0.25, 2);
  EXPECT_NEAR(f.value(x), expected, 1e-12);
}

TEST(Rastrigin, Examples) {
  const Objective f = make_benchmark(Benchmark::Rastrigin, 2);
  EXPECT_EQ(f.value(vec({0, 0})), 0.0);
  // 2x + 20 pi sin(2 pi x) at x = 0.5 is 1 (sin(pi) ~ 1e-16).
  EXPECT_NEAR(f.gradient(vec({0.5, 0}))[0], 1.0, 1e-12);
  EXPECT_NEAR(f.value(vec({1, 1})), 2.0, 1e-12);
}

TEST(MonkeySaddle, NearSaddle) {
  const Objective f = make_benchmark(Benchmark::MonkeySaddle, 2);
  const Vector x = vec({1e-3, 0});
  const Vector g = f.gradient(x);
  EXPECT_NEAR(g[0], 3e-6, 1e-20);
  EXPECT_EQ(g[1], 0.0);
  const SymMatrix h = f.hessian(x);
  EXPECT_NEAR(h(0, 0), 6e-3, 1e-18);
  EXPECT_NEAR(h(1, 1), -6e-3, 1e-18);
  EXPECT_EQ(h(0, 1), 0.0);
}

TEST(MonkeySaddle, OriginIsFlat) {
  const Objective f = make_benchmark(Benchmark::MonkeySaddle, 2);
  EXPECT_EQ(f.gradient(vec({0, 0})), vec({0, 0}));
  EXPECT_EQ(f.hessian(vec({0, 0})).dense(), DenseMatrix::Zero(2, 2));
  EXPECT_TRUE(f.known_minima().empty());
}

TEST(Himmelblau, Examples) {
  const Objective f = make_benchmark(Benchmark::Himmelblau, 2);
  EXPECT_EQ(f.value(vec({3, 2})), 0.0);
  EXPECT_EQ(f.value(vec({0, 0})), 170.0);
  EXPECT_EQ(f.known_minima().size(), 4u);
}

TEST(SixHumpCamel, OriginIsStationary) {
  const Objective f = make_benchmark(Benchmark::SixHumpCamel, 2);
  EXPECT_EQ(f.value(vec({0, 0})), 0.0);
  EXPECT_EQ(f.gradient(vec({0, 0})), vec({0, 0}));
}

TEST(Beale, ValueAtOrigin) {
  const Objective f = make_benchmark(Benchmark::Beale, 2);
  EXPECT_EQ(f.value(vec({0, 0})), 1.5 * 1.5 + 2.25 * 2.25 + 2.625 * 2.625);
  EXPECT_EQ(f.value(vec({3, 0.5})), 0.0);
}

TEST(SumOfPowers, ExponentsGrowWithIndex) {
  const Objective f = make_benchmark(Benchmark::SumOfPowers, 3);
  // |x0|^2 + |x1|^3 + |x2|^4
  EXPECT_EQ(f.value(vec({-2, -2, -2})), 4.0 + 8.0 + 16.0);
  EXPECT_EQ(f.gradient(vec({-2, -2, -2})), vec({-4, -12, -32}));
}

TEST(Benchmarks, DimensionRules) {
  EXPECT_THROW(make_benchmark(Benchmark::Himmelblau, 3), ContractViolation);
  EXPECT_THROW(make_benchmark(Benchmark::Rosenbrock, 1), ContractViolation);
  EXPECT_THROW(make_benchmark(Benchmark::Sphere, 0), ContractViolation);
  EXPECT_THROW(make_benchmark("nope", 2), ContractViolation);
  EXPECT_NO_THROW(make_benchmark("rastrigin", 7));
}

TEST(Benchmarks, NamesRoundTrip) {
  for (Benchmark b : kAllBenchmarks) EXPECT_EQ(parse_benchmark(to_string(b)), b);
  EXPECT_FALSE(parse_benchmark("Sphere").has_value());
}

TEST(Benchmarks, WrongDimensionInputRejected) {
  const Objective f = make_benchmark(Benchmark::Sphere, 3);
  EXPECT_THROW(f.value(vec({1, 2})), ContractViolation);
  EXPECT_THROW(f.gradient(vec({1})), ContractViolation);
}

TEST(Benchmarks, KnownMinimaAreStationary) {
  for (Benchmark b : kAllBenchmarks) {
    const Objective f = bench(b);
    for (const auto& m : f.known_minima()) {
      SCOPED_TRACE(f.name());
      EXPECT_LE(inf_norm(f.gradient(m.location)), 1e-8);
      EXPECT_NEAR(f.value(m.location), m.value, 1e-12);
      if (m.strict) {
        EXPECT_TRUE(is_spd(f.hessian(m.location)));
      }
    }
  }
}

TEST(Benchmarks, StartBoxesContainMinima) {
  for (Benchmark b : kAllBenchmarks) {
    const Objective f = bench(b);
    ASSERT_TRUE(f.domain_box().has_value());
    for (const auto& m : f.known_minima()) {
      EXPECT_TRUE((m.location.array() >= f.domain_box()->lower.array()).all());
      EXPECT_TRUE((m.location.array() <= f.domain_box()->upper.array()).all());
    }
  }
}

TEST(Benchmarks, DerivativesMatchFiniteDifferences) {
  Gen gen(21);
  for (Benchmark b : kAllBenchmarks) {
    const Objective f = bench(b);
    for (int i = 0; i < 100; ++i) {
      const Vector x = gen.rng().uniform_vector(f.domain_box()->lower, f.domain_box()->upper);
      SCOPED_TRACE(f.name());
      EXPECT_LT(relative_error(f.gradient(x), finite_diff_gradient(f, x)), 1e-5);
      EXPECT_LT(relative_error(f.hessian(x), finite_diff_hessian(f, x)), 1e-4);
    }
  }
}

TEST(Logistic, ZeroWeightsGiveLn2PerSample) {
  LogisticDataset d;
  d.features = DenseMatrix::Ones(4, 2);
  d.features.col(1) << 1, -1, 2, -2;
  d.labels = vec({1, -1, 1, -1});
  const Objective f = make_logistic(d);
  EXPECT_NEAR(f.value(Vector::Zero(2)), 4 * std::numbers::ln2, 1e-14);
}

TEST(Logistic, SingleSampleGradient) {
  LogisticDataset d;
  d.features = DenseMatrix::Ones(1, 1);
  d.labels = vec({1});
  EXPECT_EQ(make_logistic(d).gradient(vec({0})), vec({-0.5}));
}

TEST(Logistic, HessianAtZeroIsQuarterGram) {
  const LogisticDataset d = make_synthetic_logistic(50, 3, 5);
  const Objective f = make_logistic(d);
  const DenseMatrix expected = 0.25 * d.features.transpose() * d.features;
  EXPECT_LT(max_abs(f.hessian(Vector::Zero(4)).dense() - expected), 1e-12);
  EXPECT_EQ(f.fixed_bound()->dense(), logistic_fixed_bound(d.features).dense());
  EXPECT_LT(max_abs(finite_diff_hessian(f, Vector::Zero(4)).dense() - expected), 1e-4);
}

TEST(Logistic, StableForLargeMargins) {
  LogisticDataset d;
  d.features = DenseMatrix::Ones(2, 1);
  d.labels = vec({1, -1});
  const Objective f = make_logistic(d);
  EXPECT_TRUE(std::isfinite(f.value(vec({800}))));
  EXPECT_NEAR(f.value(vec({800})), 800.0, 1e-9);
  EXPECT_TRUE(f.gradient(vec({-800})).allFinite());
}

TEST(Logistic, RejectsBadData) {
  LogisticDataset d;
  d.features = DenseMatrix::Ones(2, 1);
  d.labels = vec({1, 0});
  EXPECT_THROW(make_logistic(d), ContractViolation);
  d.labels = vec({1});
  EXPECT_THROW(make_logistic(d), ContractViolation);
  EXPECT_THROW(make_logistic(LogisticDataset{}), ContractViolation);
}

TEST(Logistic, SyntheticIsSeeded) {
  const LogisticDataset a = make_synthetic_logistic(30, 4, 9);
  const LogisticDataset b = make_synthetic_logistic(30, 4, 9);
  const LogisticDataset c = make_synthetic_logistic(30, 4, 10);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(a.features, c.features);
  EXPECT_TRUE((a.features.col(0).array() == 1.0).all());
}

TEST(Logistic, CsvRoundTrip) {
  const LogisticDataset d = make_synthetic_logistic(20, 3, 4);
  const auto path = std::filesystem::temp_directory_path() / "qqg_logistic_roundtrip.csv";
  write_logistic_csv(d, path.string());
  const LogisticDataset back = read_logistic_csv(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
}

TEST(FiniteDiff, SphereGradient) {
  const Objective f = make_benchmark(Benchmark::Sphere, 2);
  const Vector g = finite_diff_gradient(f, vec({1, 0}), 1e-6);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 0.0, 1e-8);
}

TEST(FiniteDiff, ConstantObjectiveHasZeroGradient) {
  const Objective c("const", 3, [](const Vector&) { return 4.0; },
                    [](const Vector& x) { return Vector(Vector::Zero(x.size())); });
  EXPECT_EQ(finite_diff_gradient(c, vec({1, 2, 3})), Vector::Zero(3));
}

TEST(FiniteDiff, RosenbrockGradient) {
  const Objective f = make_benchmark(Benchmark::Rosenbrock, 2);
  const Vector x = vec({-1.2, 1});
  EXPECT_LT(relative_error(f.gradient(x), finite_diff_gradient(f, x, 1e-6)), 1e-5);
}

TEST(FiniteDiff, Hessians) {
  const Objective sphere = make_benchmark(Benchmark::Sphere, 3);
  EXPECT_LT(max_abs(finite_diff_hessian(sphere, vec({0.3, -1, 2})).dense() - 2.0 * DenseMatrix::Identity(3, 3)),
            1e-6);
  const Objective saddle = make_benchmark(Benchmark::MonkeySaddle, 2);
  DenseMatrix expected(2, 2);
  expected << 6, -6, -6, -6;
  const SymMatrix h = finite_diff_hessian(saddle, vec({1, 1}));
  EXPECT_LT(max_abs(h.dense() - expected), 1e-4);
  EXPECT_EQ(h.dense(), h.dense().transpose());
}

TEST(FiniteDiff, NonFiniteValueIsOracleFailure) {
  const Objective bad("log", 1, [](const Vector& x) { return std::log(x[0]); },
                      [](const Vector& x) { return Vector(Vector::Constant(1, 1.0 / x[0])); });
  EXPECT_THROW(finite_diff_gradient(bad, vec({0}), 1e-3), OracleFailure);
  EXPECT_THROW(finite_diff_hessian(bad, vec({0}), 1e-3), OracleFailure);
}

TEST(CountingEvaluator, CountsAndNegates) {
  const Objective f = make_benchmark(Benchmark::Sphere, 2);
  CountingEvaluator ev(f, true);
  EXPECT_EQ(ev.value(vec({1, 2})), -5.0);
  EXPECT_EQ(ev.gradient(vec({1, 2})), vec({-2, -4}));
  EXPECT_EQ(ev.hessian(vec({1, 2})).dense(), -2.0 * DenseMatrix::Identity(2, 2));
  ev.evaluate(vec({0, 0}), true);
  EXPECT_EQ(ev.counts().value, 2);
  EXPECT_EQ(ev.counts().gradient, 2);
  EXPECT_EQ(ev.counts().hessian, 2);
}

TEST(CountingEvaluator, MissingHessianThrows) {
  const Objective f("nohess", 1, [](const Vector& x) { return x[0]; },
                    [](const Vector&) { return Vector(Vector::Ones(1)); });
  EXPECT_FALSE(f.has_hessian());
  EXPECT_THROW(f.hessian(vec({1})), ContractViolation);
}
