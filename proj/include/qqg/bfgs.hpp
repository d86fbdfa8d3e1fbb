#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "qqg/errors.hpp"
#include "qqg/numerics.hpp"

namespace qqg {

struct BfgsOptions {
  /// H_0 = init_scale * I.
  double init_scale = 1.0;
  /// Replace H_0 by (y^T s / y^T y) I right before the first accepted update.
  bool rescale_first = false;
  /// Also maintain the direct approximation B_k and check SPD / B_k H_k = I
  /// after every accepted update.
  bool verify = false;
  double curvature_tol = 1e-10;
};

/// Worst-case values observed over the accepted updates of one state.
struct BfgsDiagnostics {
  long spd_failures = 0;
  /// max ||H_{k+1} y - s|| / (1 + ||s||)
  double max_secant_residual = 0.0;
  /// max ||B_k H_k - I||_inf, verify mode only.
  double max_inverse_mismatch = 0.0;
};

/// s^T y > tau ||s|| ||y||
inline bool curvature_guard(const Vector& s, const Vector& y, double tau = 1e-10) {
  detail::require(s.size() == y.size(), "curvature_guard: dimension mismatch");
  const double sy = s.dot(y);
  return std::isfinite(sy) && sy > tau * s.norm() * y.norm();
}

/// BFGS curvature model. Keeps the inverse approximation H_k directly with the
/// rank-two inverse update
///
///   H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T,   rho = 1 / y^T s,
///
/// and, in verify mode, the direct approximation
///
///   B+ = B + y y^T / y^T s - B s s^T B / s^T B s.
///
/// Single owner; not for concurrent mutation.
class BfgsState {
 public:
  explicit BfgsState(Index n, BfgsOptions opts = {}) : opts_(opts) {
    detail::require(n >= 1, "BfgsState: dimension must be >= 1");
    detail::require(opts_.init_scale > 0.0 && std::isfinite(opts_.init_scale),
                    "BfgsState: scale must be positive");
    h_inv_ = SymMatrix::identity(n, opts_.init_scale);
    if (opts_.verify) b_direct_ = SymMatrix::identity(n, 1.0 / opts_.init_scale);
  }

  static BfgsState init(Index n, double scale = 1.0) {
    BfgsOptions o;
    o.init_scale = scale;
    return BfgsState(n, o);
  }

  Index dim() const { return h_inv_.dim(); }
  const SymMatrix& inverse_hessian() const { return h_inv_; }
  const std::optional<SymMatrix>& direct_hessian() const { return b_direct_; }
  long iteration() const { return k_; }
  long updates_applied() const { return applied_; }
  long updates_skipped() const { return skipped_; }
  const BfgsDiagnostics& diagnostics() const { return diag_; }
  const BfgsOptions& options() const { return opts_; }

  /// A frozen state ignores observe() and update(); its H stays as it is.
  void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }

  /// Applies the update for displacement s and gradient change y. Returns
  /// false (and counts a skip) when the curvature guard rejects the pair.
  /// Throws NumericalError on non-finite results; the state is unchanged then.
  bool update(const Vector& s, const Vector& y) {
    detail::require(s.size() == dim() && y.size() == dim(), "BfgsState::update: dimension mismatch");
    if (frozen_) return false;
    if (!s.allFinite() || !y.allFinite())
      throw NumericalError("BfgsState::update: non-finite s or y");
    if (!curvature_guard(s, y, opts_.curvature_tol)) {
      ++skipped_;
      return false;
    }
    const double ys = y.dot(s);
    const double rho = 1.0 / ys;

    DenseMatrix H = h_inv_.dense();
    std::optional<DenseMatrix> B;
    if (b_direct_) B = b_direct_->dense();
    if (opts_.rescale_first && applied_ == 0) {
      const double gamma = ys / y.squaredNorm();
      H = DenseMatrix::Identity(dim(), dim()) * gamma;
      if (B) *B = DenseMatrix::Identity(dim(), dim()) / gamma;
    }

    const Vector Hy = H * y;
    const double yHy = y.dot(Hy);
    DenseMatrix Hn = H - rho * (s * Hy.transpose() + Hy * s.transpose()) +
                     (rho * rho * yHy + rho) * (s * s.transpose());
    SymMatrix h_next = SymMatrix::from_lower(Hn);
    if (!h_next.all_finite()) throw NumericalError("BfgsState::update: non-finite inverse update");

    std::optional<SymMatrix> b_next;
    if (B) {
      const Vector Bs = *B * s;
      const double sBs = s.dot(Bs);
      DenseMatrix Bn = *B + (y * y.transpose()) / ys - (Bs * Bs.transpose()) / sBs;
      b_next = SymMatrix::from_lower(Bn);
      if (!b_next->all_finite()) throw NumericalError("BfgsState::update: non-finite direct update");
    }

    h_inv_ = std::move(h_next);
    if (b_next) b_direct_ = std::move(b_next);
    ++k_;
    ++applied_;
    record_diagnostics(s, y);
    return true;
  }

  /// Feeds the iterate sequence: the first call records (x, g); later calls
  /// update with s = x - prev_x, y = g - prev_g. Returns whether an update
  /// was applied.
  bool observe(const Vector& x, const Vector& g) {
    detail::require(x.size() == dim() && g.size() == dim(), "BfgsState::observe: dimension mismatch");
    if (frozen_) return false;
    bool applied = false;
    if (prev_x_) applied = update(x - *prev_x_, g - *prev_g_);
    prev_x_ = x;
    prev_g_ = g;
    return applied;
  }

  /// Records (x, g) as the reference pair without updating.
  void rebase(const Vector& x, const Vector& g) {
    prev_x_ = x;
    prev_g_ = g;
  }

  const std::optional<Vector>& prev_x() const { return prev_x_; }
  const std::optional<Vector>& prev_g() const { return prev_g_; }

  /// Quasi-quadratic gradient H_k g.
  Vector qqg_direction(const Vector& g) const { return matvec(h_inv_, g); }

 private:
  void record_diagnostics(const Vector& s, const Vector& y) {
    const double secant = (h_inv_.dense() * y - s).norm() / (1.0 + s.norm());
    diag_.max_secant_residual = std::max(diag_.max_secant_residual, secant);
    if (opts_.verify) {
      if (!is_spd(h_inv_)) ++diag_.spd_failures;
      const DenseMatrix E =
          b_direct_->dense() * h_inv_.dense() - DenseMatrix::Identity(dim(), dim());
      const double mismatch = E.cwiseAbs().rowwise().sum().maxCoeff();
      diag_.max_inverse_mismatch = std::max(diag_.max_inverse_mismatch, mismatch);
    }
  }

  BfgsOptions opts_;
  SymMatrix h_inv_;
  std::optional<SymMatrix> b_direct_;
  std::optional<Vector> prev_x_;
  std::optional<Vector> prev_g_;
  long k_ = 0;
  long applied_ = 0;
  long skipped_ = 0;
  bool frozen_ = false;
  BfgsDiagnostics diag_;
};

}  // namespace qqg
