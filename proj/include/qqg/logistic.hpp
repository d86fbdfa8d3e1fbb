#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qqg/csv.hpp"
#include "qqg/errors.hpp"
#include "qqg/objective.hpp"
#include "qqg/random.hpp"

namespace qqg {

/// Design matrix (samples x (d+1), first column the intercept) and +/-1 labels.
struct LogisticDataset {
  DenseMatrix features;
  Vector labels;
};

namespace detail {

// log(1 + exp(-z)) without overflow.
inline double log1p_exp_neg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// (1/4) X^T X, the classic fixed Hessian bound for the logistic loss.
inline SymMatrix logistic_fixed_bound(const DenseMatrix& features) {
  return SymMatrix::from_lower(0.25 * features.transpose() * features);
}

/// Negative log-likelihood  f(w) = sum_i log(1 + exp(-y_i w^T x_i)).
inline Objective make_logistic(const LogisticDataset& data) {
  const DenseMatrix& X = data.features;
  const Vector& y = data.labels;
  detail::require(X.rows() > 0 && X.cols() > 0, "make_logistic: empty dataset");
  detail::require(y.size() == X.rows(), "make_logistic: label count does not match samples");
  for (Index i = 0; i < y.size(); ++i) {
    detail::require(y[i] == 1.0 || y[i] == -1.0,
                    "make_logistic: label at row " + std::to_string(i) + " is not in {-1,+1}");
  }

  auto value = [X, y](const Vector& w) {
    const Vector z = (X * w).cwiseProduct(y);
    double f = 0.0;
    for (Index i = 0; i < z.size(); ++i) f += detail::log1p_exp_neg(z[i]);
    return f;
  };
  auto gradient = [X, y](const Vector& w) {
    const Vector z = (X * w).cwiseProduct(y);
    Vector coef(z.size());
    for (Index i = 0; i < z.size(); ++i) coef[i] = -(1.0 - detail::sigmoid(z[i])) * y[i];
    return Vector(X.transpose() * coef);
  };
  auto hessian = [X](const Vector& w) {
    const Vector z = X * w;
    Vector s(z.size());
    for (Index i = 0; i < z.size(); ++i) {
      const double p = detail::sigmoid(z[i]);
      s[i] = p * (1.0 - p);
    }
    return SymMatrix::from_lower(X.transpose() * s.asDiagonal() * X);
  };

  const Index d = X.cols();
  return Objective("logistic", d, value, gradient, hessian)
      .with_box(Box::cube(d, -1.0, 1.0))
      .with_fixed_bound(logistic_fixed_bound(X));
}

/// Seeded synthetic data: standard normal features plus an intercept column,
/// a true weight vector drawn once from N(0, 1), and labels sampled from the
/// resulting logistic model.
inline LogisticDataset make_synthetic_logistic(Index samples = 200, Index features = 8,
                                               std::uint64_t seed = 7) {
  detail::require(samples > 0 && features >= 0, "make_synthetic_logistic: bad shape");
  Rng rng(seed);
  const Vector w_true = rng.normal_vector(features + 1);
  LogisticDataset data;
  data.features.resize(samples, features + 1);
  data.labels.resize(samples);
  for (Index i = 0; i < samples; ++i) {
    data.features(i, 0) = 1.0;
    for (Index j = 1; j <= features; ++j) data.features(i, j) = rng.normal();
    const double p = detail::sigmoid(data.features.row(i).dot(w_true));
    data.labels[i] = rng.uniform01() < p ? 1.0 : -1.0;
  }
  return data;
}

/// Header `x0,...,x{d},label`; label column last; 17 significant digits.
inline void write_logistic_csv(const LogisticDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const Index cols = data.features.cols();
  for (Index j = 0; j < cols; ++j) out << 'x' << j << ',';
  out << "label\n";
  for (Index i = 0; i < data.features.rows(); ++i) {
    for (Index j = 0; j < cols; ++j) out << csv::format_double(data.features(i, j)) << ',';
    out << csv::format_double(data.labels[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline LogisticDataset read_logistic_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': missing header");
  const auto header = csv::split(line);
  if (header.size() < 2 || header.back() != "label")
    throw std::runtime_error("'" + path + "': last column must be 'label'");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size())
      throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) +
                               ": wrong field count");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(csv::parse_double(f));
    rows.push_back(std::move(row));
  }
  LogisticDataset data;
  const Index m = static_cast<Index>(rows.size());
  const Index cols = static_cast<Index>(header.size()) - 1;
  data.features.resize(m, cols);
  data.labels.resize(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < cols; ++j) data.features(i, j) = rows[i][j];
    data.labels[i] = rows[i][cols];
  }
  return data;
}

}  // namespace qqg
