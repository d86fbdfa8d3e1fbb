#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "qqg/errors.hpp"
#include "qqg/numerics.hpp"

namespace qqg {

// Verification oracles. They only call value(); they never touch the
// analytic gradient or Hessian they are used to check.

/// Default per-coordinate gradient step: 1e-6 * max(1, |x_i|).
inline double fd_gradient_step(double xi) { return 1e-6 * std::max(1.0, std::abs(xi)); }

/// Default per-coordinate Hessian step: 1e-4 * max(1, |x_i|). Second
/// differences of values divide by h^2, so the gradient step would leave
/// nothing but cancellation noise.
inline double fd_hessian_step(double xi) { return 1e-4 * std::max(1.0, std::abs(xi)); }

namespace detail {

template <class Obj>
double checked_value(const Obj& obj, const Vector& x) {
  const double f = obj.value(x);
  if (!std::isfinite(f)) throw OracleFailure("finite difference: non-finite objective value");
  return f;
}

}  // namespace detail

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. A non-positive h
/// selects the default per-coordinate step.
template <class Obj>
Vector finite_diff_gradient(const Obj& obj, const Vector& x, double h = 0.0) {
  Vector g(x.size());
  Vector xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double hi = h > 0 ? h : fd_gradient_step(x[i]);
    xp[i] = x[i] + hi;
    const double fp = detail::checked_value(obj, xp);
    xp[i] = x[i] - hi;
    const double fm = detail::checked_value(obj, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

/// Second-order central differences of values, symmetrized.
///   H_ii = (f(x+h e_i) - 2 f(x) + f(x-h e_i)) / h^2
///   H_ij = (f(++) - f(+-) - f(-+) + f(--)) / (4 h_i h_j)
template <class Obj>
SymMatrix finite_diff_hessian(const Obj& obj, const Vector& x, double h = 0.0) {
  const Index n = x.size();
  Vector step(n);
  for (Index i = 0; i < n; ++i) step[i] = h > 0 ? h : fd_hessian_step(x[i]);

  const double f0 = detail::checked_value(obj, x);
  DenseMatrix H(n, n);
  Vector xp = x;
  for (Index i = 0; i < n; ++i) {
    const double hi = step[i];
    xp[i] = x[i] + hi;
    const double fp = detail::checked_value(obj, xp);
    xp[i] = x[i] - hi;
    const double fm = detail::checked_value(obj, xp);
    xp[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      const double hi = step[i], hj = step[j];
      auto at = [&](double si, double sj) {
        xp[i] = x[i] + si * hi;
        xp[j] = x[j] + sj * hj;
        const double f = detail::checked_value(obj, xp);
        xp[i] = x[i];
        xp[j] = x[j];
        return f;
      };
      const double hij = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      H(i, j) = hij;
      H(j, i) = hij;
    }
  }
  return SymMatrix::from_lower(H);
}

/// max_i |a_i - b_i| / max(1, max_i |a_i|)
inline double relative_error(const Vector& analytic, const Vector& approx) {
  detail::require(analytic.size() == approx.size(), "relative_error: dimension mismatch");
  const double scale = std::max(1.0, inf_norm(analytic));
  return inf_norm(analytic - approx) / scale;
}

inline double relative_error(const SymMatrix& analytic, const SymMatrix& approx) {
  detail::require(analytic.dim() == approx.dim(), "relative_error: dimension mismatch");
  const double scale = std::max(1.0, analytic.dense().cwiseAbs().maxCoeff());
  return (analytic.dense() - approx.dense()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace qqg
