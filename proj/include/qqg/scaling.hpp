#pragma once

#include <cmath>
#include <string_view>

#include "qqg/errors.hpp"
#include "qqg/numerics.hpp"

namespace qqg {

enum class ScalingMode { OQG, SQG };

inline std::string_view to_string(ScalingMode m) { return m == ScalingMode::OQG ? "oqg" : "sqg"; }

/// Diagonal preconditioner B-bar built from a Hessian bound matrix. Every
/// entry is in (0, 1/eps].
class ScalingMatrix {
 public:
  ScalingMatrix(DiagMatrix diag, double eps, ScalingMode mode)
      : diag_(std::move(diag)), eps_(eps), mode_(mode) {}

  const DiagMatrix& diag() const { return diag_; }
  double epsilon() const { return eps_; }
  ScalingMode mode() const { return mode_; }
  Index dim() const { return diag_.dim(); }

  double min_entry() const { return diag_.entries().minCoeff(); }
  double max_entry() const { return diag_.entries().maxCoeff(); }

  /// G = B-bar g.
  Vector apply(const Vector& g) const { return matvec(diag_, g); }

 private:
  DiagMatrix diag_;
  double eps_;
  ScalingMode mode_;
};

namespace detail {

inline void check_scaling_inputs(const SymMatrix& hbar, double eps) {
  require(eps > 0.0 && std::isfinite(eps), "scaling: eps must be positive");
  require(hbar.dim() >= 1, "scaling: empty bound matrix");
  if (!hbar.all_finite()) throw NumericalError("scaling: bound matrix has non-finite entries");
}

}  // namespace detail

/// Original quadratic gradient: diag_j = 1 / (eps + sum_i |hbar_ji|), the
/// absolute row sum including the diagonal.
inline ScalingMatrix build_oqg(const SymMatrix& hbar, double eps = 1e-8) {
  detail::check_scaling_inputs(hbar, eps);
  Vector d = hbar.dense().cwiseAbs().rowwise().sum();
  d = (d.array() + eps).inverse();
  return ScalingMatrix(DiagMatrix(std::move(d)), eps, ScalingMode::OQG);
}

/// Simplified quadratic gradient: diag_j = 1 / (eps + |hbar_jj|).
inline ScalingMatrix build_sqg(const SymMatrix& hbar, double eps = 1e-8) {
  detail::check_scaling_inputs(hbar, eps);
  Vector d = hbar.dense().diagonal().cwiseAbs();
  d = (d.array() + eps).inverse();
  return ScalingMatrix(DiagMatrix(std::move(d)), eps, ScalingMode::SQG);
}

inline ScalingMatrix build_scaling(ScalingMode mode, const SymMatrix& hbar, double eps = 1e-8) {
  return mode == ScalingMode::OQG ? build_oqg(hbar, eps) : build_sqg(hbar, eps);
}

/// Loewner order A <= B, i.e. B - A positive semi-definite.
inline bool is_loewner_leq(const SymMatrix& a, const SymMatrix& b, double rel_tol = 1e-12) {
  detail::require(a.dim() == b.dim(), "is_loewner_leq: dimension mismatch");
  return is_psd(SymMatrix::from_lower(b.dense() - a.dense()), rel_tol);
}

}  // namespace qqg
