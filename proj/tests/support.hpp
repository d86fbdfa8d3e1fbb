#pragma once

#include <cstdint>
#include <string>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "qqg/numerics.hpp"
#include "qqg/random.hpp"

namespace qqg::testing {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline SymMatrix sym2(double a, double b, double c) {
  DenseMatrix m(2, 2);
  m << a, b, b, c;
  return SymMatrix::from_lower(m);
}

/// Seeded input generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  Index dim(Index lo, Index hi) {
    return lo + static_cast<Index>(rng_.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double scalar(double lo = -1.0, double hi = 1.0) { return rng_.uniform(lo, hi); }
  Vector vector(Index n, double scale = 1.0) { return scale * rng_.normal_vector(n); }
  Vector nonzero(Index n) {
    Vector v = vector(n);
    while (v.norm() < 1e-3) v = vector(n);
    return v;
  }
  DenseMatrix dense(Index n) {
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) m(i, j) = rng_.normal();
    return m;
  }
  SymMatrix symmetric(Index n) {
    const DenseMatrix m = dense(n);
    return SymMatrix::from_lower(0.5 * (m + m.transpose()));
  }
  /// M M^T + shift I.
  SymMatrix spd(Index n, double shift = 0.5) {
    const DenseMatrix m = dense(n);
    return SymMatrix::from_lower(m * m.transpose() + shift * DenseMatrix::Identity(n, n));
  }
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace qqg::testing
