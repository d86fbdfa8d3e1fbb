#pragma once

#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qqg/errors.hpp"
#include "qqg/numerics.hpp"

namespace qqg {

struct KnownMinimum {
  Vector location;
  double value = 0.0;
  /// Hessian is SPD at the location.
  bool strict = true;
};

/// Per-coordinate sampling bounds. Only used to draw random starts; the
/// optimizers themselves are unconstrained.
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(Index n, double lo, double hi) {
    return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
  }
};

/// A scalar objective with analytic gradient and, optionally, Hessian.
/// Immutable and safe to evaluate concurrently.
class Objective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<SymMatrix(const Vector&)>;

  Objective(std::string name, Index dim, ValueFn value, GradientFn gradient,
            HessianFn hessian = {})
      : name_(std::move(name)),
        dim_(dim),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        hessian_(std::move(hessian)) {
    detail::require(dim_ >= 1, "Objective: dimension must be >= 1");
    detail::require(static_cast<bool>(value_) && static_cast<bool>(gradient_),
                    "Objective: value and gradient are required");
  }

  const std::string& name() const { return name_; }
  Index dim() const { return dim_; }

  double value(const Vector& x) const {
    check_dim(x);
    return value_(x);
  }

  Vector gradient(const Vector& x) const {
    check_dim(x);
    return gradient_(x);
  }

  bool has_hessian() const { return static_cast<bool>(hessian_); }

  SymMatrix hessian(const Vector& x) const {
    detail::require(has_hessian(), "Objective '" + name_ + "' has no Hessian");
    check_dim(x);
    return hessian_(x);
  }

  const std::vector<KnownMinimum>& known_minima() const { return minima_; }
  const std::optional<Box>& domain_box() const { return box_; }

  /// Constant Hessian bound usable as a fixed preconditioner source.
  const std::optional<SymMatrix>& fixed_bound() const { return fixed_bound_; }

  Objective& with_minima(std::vector<KnownMinimum> m) {
    minima_ = std::move(m);
    return *this;
  }
  Objective& with_box(Box b) {
    box_ = std::move(b);
    return *this;
  }
  Objective& with_fixed_bound(SymMatrix b) {
    fixed_bound_ = std::move(b);
    return *this;
  }

 private:
  void check_dim(const Vector& x) const {
    detail::require(x.size() == dim_, "Objective '" + name_ + "': expected dimension " +
                                          std::to_string(dim_) + ", got " +
                                          std::to_string(x.size()));
  }

  std::string name_;
  Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  std::vector<KnownMinimum> minima_;
  std::optional<Box> box_;
  std::optional<SymMatrix> fixed_bound_;
};

/// Anything with value(x) and gradient(x); line searches accept it.
template <class F>
concept Differentiable = requires(F& f, const Vector& x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
};

struct EvalCounts {
  long value = 0;
  long gradient = 0;
  long hessian = 0;

  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

struct EvalResult {
  double f = 0.0;
  Vector g;
  std::optional<SymMatrix> h;
  EvalCounts counts;
};

/// Wraps an Objective for one run: counts evaluations and, in maximization
/// mode, presents the negated objective so every algorithm minimizes.
/// Negation is exact in floating point, so min(f) and max(-f) see bitwise
/// identical values.
class CountingEvaluator {
 public:
  explicit CountingEvaluator(const Objective& obj, bool negate = false)
      : obj_(&obj), sign_(negate ? -1.0 : 1.0) {}

  double value(const Vector& x) {
    ++counts_.value;
    return sign_ * obj_->value(x);
  }

  Vector gradient(const Vector& x) {
    ++counts_.gradient;
    Vector g = obj_->gradient(x);
    if (sign_ < 0) g = -g;
    return g;
  }

  SymMatrix hessian(const Vector& x) {
    ++counts_.hessian;
    SymMatrix h = obj_->hessian(x);
    if (sign_ < 0) h = SymMatrix::from_lower(-h.dense());
    return h;
  }

  EvalResult evaluate(const Vector& x, bool with_hessian) {
    EvalResult r;
    r.f = value(x);
    r.g = gradient(x);
    if (with_hessian) r.h = hessian(x);
    r.counts = counts_;
    return r;
  }

  const Objective& objective() const { return *obj_; }
  double sign() const { return sign_; }
  const EvalCounts& counts() const { return counts_; }

 private:
  const Objective* obj_;
  double sign_;
  EvalCounts counts_;
};

}  // namespace qqg
