#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "qqg/errors.hpp"

namespace qqg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Dense symmetric matrix. The lower triangle is authoritative; every
/// constructor and mutator mirrors it into the upper triangle so the stored
/// matrix is exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Index n) : m_(DenseMatrix::Zero(n, n)) {}

  static SymMatrix identity(Index n, double scale = 1.0) {
    SymMatrix s(n);
    s.m_.diagonal().setConstant(scale);
    return s;
  }

  static SymMatrix diagonal(const Vector& d) {
    SymMatrix s(d.size());
    s.m_.diagonal() = d;
    return s;
  }

  /// Builds from a square matrix, taking the lower triangle as truth.
  static SymMatrix from_lower(const DenseMatrix& m) {
    detail::require(m.rows() == m.cols(), "SymMatrix: matrix must be square");
    SymMatrix s;
    s.m_ = m.triangularView<Eigen::Lower>();
    s.m_.triangularView<Eigen::StrictlyUpper>() = s.m_.transpose();
    return s;
  }

  Index dim() const { return m_.rows(); }

  double operator()(Index i, Index j) const { return m_(i, j); }

  void set(Index i, Index j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  const DenseMatrix& dense() const { return m_; }

  bool all_finite() const { return m_.allFinite(); }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  DenseMatrix m_;
};

/// Diagonal matrix stored as its diagonal entries.
class DiagMatrix {
 public:
  DiagMatrix() = default;
  explicit DiagMatrix(Vector entries) : d_(std::move(entries)) {}

  static DiagMatrix identity(Index n) { return DiagMatrix(Vector::Ones(n)); }

  Index dim() const { return d_.size(); }
  double operator[](Index i) const { return d_[i]; }
  const Vector& entries() const { return d_; }

 private:
  Vector d_;
};

inline Vector matvec(const SymMatrix& m, const Vector& v) {
  detail::require(m.dim() == v.size(),
                  "matvec: dimension mismatch (" + std::to_string(m.dim()) + " vs " +
                      std::to_string(v.size()) + ")");
  return m.dense() * v;
}

inline Vector matvec(const DiagMatrix& m, const Vector& v) {
  detail::require(m.dim() == v.size(),
                  "matvec: dimension mismatch (" + std::to_string(m.dim()) + " vs " +
                      std::to_string(v.size()) + ")");
  return m.entries().cwiseProduct(v);
}

/// Rank-one term u v^T. Symmetric only when u is parallel to v.
inline DenseMatrix outer(const Vector& u, const Vector& v) {
  detail::require(u.size() == v.size(), "outer: dimension mismatch");
  return u * v.transpose();
}

/// True iff a Cholesky factorization succeeds with every pivot > 0.
inline bool is_spd(const SymMatrix& m) {
  if (m.dim() == 0 || !m.all_finite()) return false;
  Eigen::LLT<DenseMatrix, Eigen::Lower> llt(m.dense());
  if (llt.info() != Eigen::Success) return false;
  // LLT rejects pivots <= 0 but accepts denormal-small ones; require a
  // strictly positive, finite factor diagonal.
  const auto& l = llt.matrixLLT();
  for (Index i = 0; i < m.dim(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
  }
  return true;
}

/// Positive semi-definiteness via Cholesky of m + shift*I, where shift is a
/// small multiple of the matrix scale.
inline bool is_psd(const SymMatrix& m, double rel_tol = 1e-12) {
  if (m.dim() == 0 || !m.all_finite()) return false;
  const double scale = std::max(1.0, m.dense().cwiseAbs().maxCoeff());
  DenseMatrix shifted = m.dense();
  shifted.diagonal().array() += rel_tol * scale;
  Eigen::LLT<DenseMatrix, Eigen::Lower> llt(shifted);
  return llt.info() == Eigen::Success;
}

inline double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace qqg
