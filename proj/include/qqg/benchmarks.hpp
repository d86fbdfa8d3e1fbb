#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "qqg/errors.hpp"
#include "qqg/objective.hpp"

namespace qqg {

enum class Benchmark {
  Sphere,
  SumOfPowers,
  Rosenbrock,
  Rastrigin,
  MonkeySaddle,
  Himmelblau,
  SixHumpCamel,
  Beale,
};

inline constexpr std::array kAllBenchmarks = {
    Benchmark::Sphere,       Benchmark::SumOfPowers, Benchmark::Rosenbrock,
    Benchmark::Rastrigin,    Benchmark::MonkeySaddle, Benchmark::Himmelblau,
    Benchmark::SixHumpCamel, Benchmark::Beale,
};

inline std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::Sphere: return "sphere";
    case Benchmark::SumOfPowers: return "powers";
    case Benchmark::Rosenbrock: return "rosenbrock";
    case Benchmark::Rastrigin: return "rastrigin";
    case Benchmark::MonkeySaddle: return "monkey_saddle";
    case Benchmark::Himmelblau: return "himmelblau";
    case Benchmark::SixHumpCamel: return "six_hump_camel";
    case Benchmark::Beale: return "beale";
  }
  return "?";
}

inline std::optional<Benchmark> parse_benchmark(std::string_view name) {
  for (auto b : kAllBenchmarks) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

/// Functions defined only on the plane.
inline bool is_two_dimensional(Benchmark b) {
  return b == Benchmark::MonkeySaddle || b == Benchmark::Himmelblau ||
         b == Benchmark::SixHumpCamel || b == Benchmark::Beale;
}

namespace detail {

inline Vector v2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

inline SymMatrix m2(double xx, double xy, double yy) {
  SymMatrix h(2);
  h.set(0, 0, xx);
  h.set(0, 1, xy);
  h.set(1, 1, yy);
  return h;
}

// f = sum x_i^2
inline Objective sphere(Index n) {
  return Objective(
             "sphere", n, [](const Vector& x) { return x.squaredNorm(); },
             [](const Vector& x) -> Vector { return 2.0 * x; },
             [n](const Vector&) { return SymMatrix::identity(n, 2.0); })
      .with_minima({{Vector::Zero(n), 0.0, true}})
      .with_box(Box::cube(n, -5.0, 5.0));
}

// f = sum_{i=1}^{n} |x_i|^{i+1}. The exponent uses the 1-based index; other
// references shift it by one.
inline Objective sum_of_powers(Index n) {
  auto value = [](const Vector& x) {
    double f = 0.0;
    for (Index k = 0; k < x.size(); ++k) f += std::pow(std::abs(x[k]), double(k + 2));
    return f;
  };
  auto gradient = [](const Vector& x) {
    Vector g(x.size());
    for (Index k = 0; k < x.size(); ++k) {
      const double p = double(k + 2);
      g[k] = p * std::pow(std::abs(x[k]), p - 1.0) * (x[k] < 0 ? -1.0 : 1.0);
    }
    return g;
  };
  auto hessian = [](const Vector& x) {
    Vector d(x.size());
    for (Index k = 0; k < x.size(); ++k) {
      const double p = double(k + 2);
      d[k] = p * (p - 1.0) * std::pow(std::abs(x[k]), p - 2.0);
    }
    return SymMatrix::diagonal(d);
  };
  // Only the first coordinate has non-zero curvature at the origin.
  return Objective("powers", n, value, gradient, hessian)
      .with_minima({{Vector::Zero(n), 0.0, n == 1}})
      .with_box(Box::cube(n, -5.0, 5.0));
}

// f = sum_{i=1}^{n-1} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2
inline Objective rosenbrock(Index n) {
  auto value = [](const Vector& x) {
    double f = 0.0;
    for (Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      const double b = 1.0 - x[i];
      f += 100.0 * a * a + b * b;
    }
    return f;
  };
  auto gradient = [](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    for (Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
      g[i + 1] += 200.0 * a;
    }
    return g;
  };
  auto hessian = [](const Vector& x) {
    const Index n = x.size();
    DenseMatrix h = DenseMatrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) {
      h(i, i) += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
      h(i + 1, i + 1) += 200.0;
      h(i + 1, i) += -400.0 * x[i];
    }
    return SymMatrix::from_lower(h);
  };
  return Objective("rosenbrock", n, value, gradient, hessian)
      .with_minima({{Vector::Ones(n), 0.0, true}})
      .with_box(Box::cube(n, -2.0, 2.0));
}

// f = 10 n + sum x_i^2 - 10 cos(2 pi x_i)
inline Objective rastrigin(Index n) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto value = [](const Vector& x) {
    double f = 10.0 * double(x.size());
    for (Index i = 0; i < x.size(); ++i) f += x[i] * x[i] - 10.0 * std::cos(two_pi * x[i]);
    return f;
  };
  auto gradient = [](const Vector& x) {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i] + 10.0 * two_pi * std::sin(two_pi * x[i]);
    return g;
  };
  auto hessian = [](const Vector& x) {
    Vector d(x.size());
    for (Index i = 0; i < x.size(); ++i)
      d[i] = 2.0 + 10.0 * two_pi * two_pi * std::cos(two_pi * x[i]);
    return SymMatrix::diagonal(d);
  };
  return Objective("rastrigin", n, value, gradient, hessian)
      .with_minima({{Vector::Zero(n), 0.0, true}})
      .with_box(Box::cube(n, -5.12, 5.12));
}

// f = x^3 - 3 x y^2. Degenerate critical point at the origin, unbounded below.
inline Objective monkey_saddle() {
  return Objective(
             "monkey_saddle", 2,
             [](const Vector& v) { return v[0] * v[0] * v[0] - 3.0 * v[0] * v[1] * v[1]; },
             [](const Vector& v) {
               return v2(3.0 * v[0] * v[0] - 3.0 * v[1] * v[1], -6.0 * v[0] * v[1]);
             },
             [](const Vector& v) { return m2(6.0 * v[0], -6.0 * v[1], -6.0 * v[0]); })
      .with_box(Box::cube(2, -5.0, 5.0));
}

// f = (x^2 + y - 11)^2 + (x + y^2 - 7)^2
inline Objective himmelblau() {
  auto value = [](const Vector& v) {
    const double a = v[0] * v[0] + v[1] - 11.0;
    const double b = v[0] + v[1] * v[1] - 7.0;
    return a * a + b * b;
  };
  auto gradient = [](const Vector& v) {
    const double x = v[0], y = v[1];
    const double a = x * x + y - 11.0;
    const double b = x + y * y - 7.0;
    return v2(4.0 * x * a + 2.0 * b, 2.0 * a + 4.0 * y * b);
  };
  auto hessian = [](const Vector& v) {
    const double x = v[0], y = v[1];
    const double a = x * x + y - 11.0;
    const double b = x + y * y - 7.0;
    return m2(4.0 * a + 8.0 * x * x + 2.0, 4.0 * x + 4.0 * y, 2.0 + 4.0 * b + 8.0 * y * y);
  };
  return Objective("himmelblau", 2, value, gradient, hessian)
      .with_minima({
          {v2(3.0, 2.0), 0.0, true},
          {v2(-2.8051180869527448531, 3.1313125182505729658), 0.0, true},
          {v2(-3.7793102533777468919, -3.2831859912861694123), 0.0, true},
          {v2(3.5844283403304917449, -1.8481265269644035535), 0.0, true},
      })
      .with_box(Box::cube(2, -5.0, 5.0));
}

// f = (4 - 2.1 x^2 + x^4/3) x^2 + x y + (-4 + 4 y^2) y^2
inline Objective six_hump_camel() {
  auto value = [](const Vector& v) {
    const double x = v[0], y = v[1];
    const double x2 = x * x, y2 = y * y;
    return (4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x * y + (-4.0 + 4.0 * y2) * y2;
  };
  auto gradient = [](const Vector& v) {
    const double x = v[0], y = v[1];
    const double x2 = x * x;
    return v2(8.0 * x - 8.4 * x2 * x + 2.0 * x2 * x2 * x + y, x - 8.0 * y + 16.0 * y * y * y);
  };
  auto hessian = [](const Vector& v) {
    const double x2 = v[0] * v[0], y2 = v[1] * v[1];
    return m2(8.0 - 25.2 * x2 + 10.0 * x2 * x2, 1.0, -8.0 + 48.0 * y2);
  };
  constexpr double fmin = -1.0316284534898773504;
  return Objective("six_hump_camel", 2, value, gradient, hessian)
      .with_minima({
          {v2(0.089842013100318062456, -0.7126564030207396334), fmin, true},
          {v2(-0.089842013100318062456, 0.7126564030207396334), fmin, true},
      })
      .with_box(Box::cube(2, -5.0, 5.0));
}

// Standard Beale form:
// f = sum_{k=1}^{3} t_k^2,  t_k = c_k - x + x y^k,  c = (1.5, 2.25, 2.625)
inline Objective beale() {
  static constexpr double c[3] = {1.5, 2.25, 2.625};
  auto value = [](const Vector& v) {
    const double x = v[0], y = v[1];
    const double yp[4] = {1.0, y, y * y, y * y * y};
    double f = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double t = c[k - 1] - x + x * yp[k];
      f += t * t;
    }
    return f;
  };
  auto gradient = [](const Vector& v) {
    const double x = v[0], y = v[1];
    const double yp[4] = {1.0, y, y * y, y * y * y};
    double gx = 0.0, gy = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double t = c[k - 1] - x + x * yp[k];
      gx += 2.0 * t * (yp[k] - 1.0);
      gy += 2.0 * t * k * x * yp[k - 1];
    }
    return v2(gx, gy);
  };
  auto hessian = [](const Vector& v) {
    const double x = v[0], y = v[1];
    const double yp[4] = {1.0, y, y * y, y * y * y};
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double t = c[k - 1] - x + x * yp[k];
      const double tx = yp[k] - 1.0;
      const double ty = k * x * yp[k - 1];
      const double txy = k * yp[k - 1];
      const double tyy = k >= 2 ? k * (k - 1) * x * yp[k - 2] : 0.0;
      hxx += 2.0 * tx * tx;
      hxy += 2.0 * (tx * ty + t * txy);
      hyy += 2.0 * (ty * ty + t * tyy);
    }
    return m2(hxx, hxy, hyy);
  };
  return Objective("beale", 2, value, gradient, hessian)
      .with_minima({{v2(3.0, 0.5), 0.0, true}})
      .with_box(Box::cube(2, -5.0, 5.0));
}

}  // namespace detail

/// Analytic benchmark objective. Scalable functions take any n >= 1
/// (Rosenbrock needs n >= 2); the planar ones require n == 2.
inline Objective make_benchmark(Benchmark b, Index n) {
  if (is_two_dimensional(b)) {
    detail::require(n == 2, std::string(to_string(b)) + " is defined for n = 2 only");
  } else if (b == Benchmark::Rosenbrock) {
    detail::require(n >= 2, "rosenbrock requires n >= 2");
  } else {
    detail::require(n >= 1, std::string(to_string(b)) + " requires n >= 1");
  }
  switch (b) {
    case Benchmark::Sphere: return detail::sphere(n);
    case Benchmark::SumOfPowers: return detail::sum_of_powers(n);
    case Benchmark::Rosenbrock: return detail::rosenbrock(n);
    case Benchmark::Rastrigin: return detail::rastrigin(n);
    case Benchmark::MonkeySaddle: return detail::monkey_saddle();
    case Benchmark::Himmelblau: return detail::himmelblau();
    case Benchmark::SixHumpCamel: return detail::six_hump_camel();
    case Benchmark::Beale: return detail::beale();
  }
  throw ContractViolation("unknown benchmark");
}

inline Objective make_benchmark(std::string_view name, Index n) {
  auto b = parse_benchmark(name);
  if (!b) throw ContractViolation("unknown benchmark '" + std::string(name) + "'");
  return make_benchmark(*b, n);
}

}  // namespace qqg
