#pragma once

// Exact Gaussian-process regression with an ARD squared-exponential (RBF)
// kernel. Inputs and targets are standardized inside fit(); hyperparameters
// live in that standardized space.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "minisonde/error.hpp"
#include "minisonde/parallel.hpp"

namespace minisonde::gp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct RbfParams {
  Scalar signal_variance{1};
  Vector<Scalar> length_scales;  // one per input dimension
  Scalar noise_variance{0};

  Eigen::Index dim() const { return length_scales.size(); }

  bool operator==(const RbfParams& o) const {
    return signal_variance == o.signal_variance && noise_variance == o.noise_variance &&
           length_scales.size() == o.length_scales.size() && length_scales == o.length_scales;
  }
};

inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;
inline constexpr double kStdFloor = 1e-12;

template <typename Scalar>
void validate(const RbfParams<Scalar>& p) {
  if (!(p.signal_variance > 0)) throw ValidationError("signal_variance must be > 0");
  if (!(p.noise_variance >= 0)) throw ValidationError("noise_variance must be >= 0");
  if (p.length_scales.size() == 0 || !(p.length_scales.array() > 0).all()) {
    throw ValidationError("length_scales must be non-empty and > 0");
  }
}

/// signal_variance * exp(-1/2 * sum_i ((a_i - b_i) / l_i)^2)
template <typename DerivedA, typename DerivedB, typename Scalar>
Scalar rbf_kernel(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                  const RbfParams<Scalar>& params) {
  if (a.size() != params.dim() || b.size() != params.dim()) {
    throw DimensionError("kernel inputs of size " + std::to_string(a.size()) + "/" + std::to_string(b.size()) +
                         " vs " + std::to_string(params.dim()) + " length scales");
  }
  const Scalar r2 = ((a.derived().reshaped() - b.derived().reshaped()).array() / params.length_scales.array())
                        .square()
                        .sum();
  return params.signal_variance * std::exp(Scalar(-0.5) * r2);
}

/// Cross-covariance K(a_rows, b_rows). Rows are points.
template <typename Scalar>
Matrix<Scalar> kernel_matrix(const Matrix<Scalar>& a, const Matrix<Scalar>& b, const RbfParams<Scalar>& params) {
  if (a.cols() != params.dim() || b.cols() != params.dim()) throw DimensionError("kernel_matrix dimension mismatch");
  const Matrix<Scalar> as = a.array().rowwise() / params.length_scales.transpose().array();
  const Matrix<Scalar> bs = b.array().rowwise() / params.length_scales.transpose().array();
  Matrix<Scalar> k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      k(i, j) = params.signal_variance * std::exp(Scalar(-0.5) * (as.row(i) - bs.row(j)).squaredNorm());
  return k;
}

/// Symmetric K(x, x); each off-diagonal entry computed once and mirrored.
template <typename Scalar>
Matrix<Scalar> kernel_matrix(const Matrix<Scalar>& x, const RbfParams<Scalar>& params) {
  if (x.cols() != params.dim()) throw DimensionError("kernel_matrix dimension mismatch");
  const Matrix<Scalar> xs = x.array().rowwise() / params.length_scales.transpose().array();
  const Eigen::Index n = x.rows();
  Matrix<Scalar> k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = params.signal_variance;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Scalar v = params.signal_variance * std::exp(Scalar(-0.5) * (xs.row(i) - xs.row(j)).squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

template <typename Scalar>
struct Standardizer {
  Vector<Scalar> mean;
  Vector<Scalar> std;

  static Standardizer of_columns(const Matrix<Scalar>& x) {
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.std.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const Scalar var = (x.col(c).array() - s.mean[c]).square().mean();
      s.std[c] = std::max(std::sqrt(var), Scalar(kStdFloor));
    }
    return s;
  }

  Matrix<Scalar> apply(const Matrix<Scalar>& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
  }
};

template <typename Scalar>
struct Factorization {
  Matrix<Scalar> lower;
  Vector<Scalar> alpha;
  Scalar jitter{0};
};

/// Cholesky of K + noise*I, escalating jitter x10 from 1e-10 to 1e-4 on failure.
template <typename Scalar>
std::optional<Factorization<Scalar>> try_factorize(const Matrix<Scalar>& xs, const Vector<Scalar>& ys,
                                                   const RbfParams<Scalar>& params) {
  const Matrix<Scalar> k = kernel_matrix(xs, params);
  const Eigen::Index n = xs.rows();
  // The effective diagonal never drops below the jitter floor.
  Scalar jitter = params.noise_variance < Scalar(kJitterStart) ? Scalar(kJitterStart) : Scalar(0);
  while (true) {
    Matrix<Scalar> kn = k;
    kn.diagonal().array() += params.noise_variance + jitter;
    Eigen::LLT<Matrix<Scalar>> llt(kn);
    if (llt.info() == Eigen::Success) {
      Matrix<Scalar> lower = llt.matrixL();
      const bool diag_ok = (lower.diagonal().array() > 0).all() && lower.diagonal().allFinite();
      if (diag_ok) {
        Vector<Scalar> alpha = llt.solve(ys);
        if (alpha.allFinite()) return Factorization<Scalar>{std::move(lower), std::move(alpha), jitter};
      }
    }
    if (n == 0) return std::nullopt;
    if (jitter == Scalar(0)) {
      jitter = Scalar(kJitterStart);
    } else if (jitter * Scalar(10) <= Scalar(kJitterMax) * Scalar(1.0000001)) {
      jitter *= Scalar(10);
    } else {
      return std::nullopt;
    }
  }
}

template <typename Scalar>
class GpModel {
 public:
  GpModel() = default;

  /// Rebuilds a model from standardized training data and normalization
  /// constants, recomputing the factorization. Used by deserialization.
  static GpModel from_standardized(Matrix<Scalar> train_x, Vector<Scalar> train_y, RbfParams<Scalar> params,
                                   Standardizer<Scalar> x_norm, Scalar y_mean, Scalar y_std) {
    validate(params);
    if (train_x.cols() != params.dim() || x_norm.mean.size() != params.dim() || x_norm.std.size() != params.dim()) {
      throw DimensionError("model parts disagree on input dimension");
    }
    if (train_x.rows() != train_y.size() || train_x.rows() == 0) throw DimensionError("bad training data shape");
    auto f = try_factorize(train_x, train_y, params);
    if (!f) throw NotPositiveDefinite("Cholesky failed even with jitter " + std::to_string(kJitterMax));
    GpModel m;
    m.train_x_ = std::move(train_x);
    m.train_y_ = std::move(train_y);
    m.params_ = std::move(params);
    m.x_norm_ = std::move(x_norm);
    m.y_mean_ = y_mean;
    m.y_std_ = y_std;
    m.chol_ = std::move(f->lower);
    m.alpha_ = std::move(f->alpha);
    m.jitter_ = f->jitter;
    return m;
  }

  const Matrix<Scalar>& train_x() const { return train_x_; }
  const Vector<Scalar>& train_y() const { return train_y_; }
  const RbfParams<Scalar>& params() const { return params_; }
  const Matrix<Scalar>& chol_factor() const { return chol_; }
  const Vector<Scalar>& alpha() const { return alpha_; }
  const Standardizer<Scalar>& x_norm() const { return x_norm_; }
  Scalar y_mean() const { return y_mean_; }
  Scalar y_std() const { return y_std_; }
  /// Extra diagonal added beyond noise_variance to make the factorization succeed.
  Scalar jitter() const { return jitter_; }
  Eigen::Index input_dim() const { return params_.dim(); }
  Eigen::Index size() const { return train_x_.rows(); }

  /// -1/2 y^T alpha - sum log L_ii - n/2 log 2 pi, on standardized targets.
  Scalar log_marginal_likelihood() const {
    const auto n = static_cast<Scalar>(train_y_.size());
    return Scalar(-0.5) * train_y_.dot(alpha_) - chol_.diagonal().array().log().sum() -
           Scalar(0.5) * n * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  }

 private:
  Matrix<Scalar> train_x_;
  Vector<Scalar> train_y_;
  RbfParams<Scalar> params_;
  Matrix<Scalar> chol_;
  Vector<Scalar> alpha_;
  Standardizer<Scalar> x_norm_;
  Scalar y_mean_{0};
  Scalar y_std_{1};
  Scalar jitter_{0};
};

namespace detail {

template <typename Scalar>
void check_training_data(const Matrix<Scalar>& x, const Vector<Scalar>& y) {
  if (x.rows() < 1) throw InvalidData("need at least one training point");
  if (x.rows() != y.size()) throw DimensionError("x has " + std::to_string(x.rows()) + " rows, y has " +
                                                 std::to_string(y.size()) + " entries");
  if (!x.allFinite() || !y.allFinite()) throw InvalidData("non-finite training value");
}

template <typename Scalar>
std::pair<Scalar, Scalar> target_norm(const Vector<Scalar>& y) {
  const Scalar mean = y.mean();
  const Scalar sd = std::sqrt((y.array() - mean).square().mean());
  return {mean, std::max(sd, Scalar(kStdFloor))};
}

}  // namespace detail

template <typename Scalar>
GpModel<Scalar> fit(const Matrix<Scalar>& x, const Vector<Scalar>& y, const RbfParams<Scalar>& params) {
  detail::check_training_data(x, y);
  validate(params);
  if (x.cols() != params.dim()) {
    throw DimensionError("x has " + std::to_string(x.cols()) + " columns, params have " +
                         std::to_string(params.dim()) + " length scales");
  }
  auto x_norm = Standardizer<Scalar>::of_columns(x);
  const auto [y_mean, y_std] = detail::target_norm(y);
  Matrix<Scalar> xs = x_norm.apply(x);
  Vector<Scalar> ys = (y.array() - y_mean) / y_std;
  return GpModel<Scalar>::from_standardized(std::move(xs), std::move(ys), params, std::move(x_norm), y_mean, y_std);
}

template <typename Scalar>
struct Prediction {
  Vector<Scalar> mean;
  Vector<Scalar> variance;
};

template <typename Scalar>
Matrix<Scalar> standardize_query(const GpModel<Scalar>& model, const Matrix<Scalar>& query) {
  if (query.cols() != model.input_dim()) {
    throw DimensionError("query has " + std::to_string(query.cols()) + " columns, model expects " +
                         std::to_string(model.input_dim()));
  }
  return model.x_norm().apply(query);
}

/// Predictive mean only; skips the triangular solve needed for variances.
template <typename Scalar>
Vector<Scalar> predict_mean(const GpModel<Scalar>& model, const Matrix<Scalar>& query) {
  const Matrix<Scalar> qs = standardize_query(model, query);
  const Matrix<Scalar> k_star = kernel_matrix(model.train_x(), qs, model.params());
  return (model.y_mean() + model.y_std() * (k_star.transpose() * model.alpha()).array()).matrix();
}

template <typename Scalar>
Prediction<Scalar> predict(const GpModel<Scalar>& model, const Matrix<Scalar>& query) {
  const Matrix<Scalar> qs = standardize_query(model, query);
  const Matrix<Scalar> k_star = kernel_matrix(model.train_x(), qs, model.params());
  Prediction<Scalar> out;
  out.mean = (model.y_mean() + model.y_std() * (k_star.transpose() * model.alpha()).array()).matrix();
  const Matrix<Scalar> v = model.chol_factor().template triangularView<Eigen::Lower>().solve(k_star);
  const Vector<Scalar> reduction = v.colwise().squaredNorm().transpose();
  const Scalar prior = model.params().signal_variance + model.params().noise_variance;
  out.variance = ((prior - reduction.array()).max(Scalar(0)) * model.y_std() * model.y_std()).matrix();
  return out;
}

/// Log marginal likelihood of (x, y) under `params`, on standardized data.
/// Empty when the factorization fails at every jitter level.
template <typename Scalar>
std::optional<Scalar> log_marginal_likelihood(const Matrix<Scalar>& xs, const Vector<Scalar>& ys,
                                              const RbfParams<Scalar>& params) {
  auto f = try_factorize(xs, ys, params);
  if (!f) return std::nullopt;
  const auto n = static_cast<Scalar>(ys.size());
  return Scalar(-0.5) * ys.dot(f->alpha) - f->lower.diagonal().array().log().sum() -
         Scalar(0.5) * n * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Grid entry with the highest exact log marginal likelihood on standardized
/// data; ties go to the earliest entry.
template <typename Scalar>
RbfParams<Scalar> select_hyperparams(const Matrix<Scalar>& x, const Vector<Scalar>& y,
                                     const std::vector<RbfParams<Scalar>>& grid) {
  if (grid.empty()) throw ValidationError("hyperparameter grid is empty");
  detail::check_training_data(x, y);
  if (x.rows() < 3) throw ValidationError("hyperparameter selection needs at least 3 points");
  for (const auto& p : grid) {
    validate(p);
    if (p.dim() != x.cols()) throw DimensionError("grid entry dimension does not match x");
  }
  const auto x_norm = Standardizer<Scalar>::of_columns(x);
  const auto [y_mean, y_std] = detail::target_norm(y);
  const Matrix<Scalar> xs = x_norm.apply(x);
  const Vector<Scalar> ys = (y.array() - y_mean) / y_std;

  std::vector<std::optional<Scalar>> scores(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { scores[i] = log_marginal_likelihood(xs, ys, grid[i]); });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!scores[i] || !std::isfinite(*scores[i])) continue;
    if (!best || *scores[i] > *scores[*best]) best = i;
  }
  if (!best) throw NotPositiveDefinite("every hyperparameter candidate failed Cholesky");
  return grid[*best];
}

/// Cartesian grid: signal variances x per-dimension length scales x noise variances.
template <typename Scalar = double>
std::vector<RbfParams<Scalar>> make_hyper_grid(Eigen::Index dim, const std::vector<Scalar>& signal_variances,
                                               const std::vector<Scalar>& length_scales,
                                               const std::vector<Scalar>& noise_variances) {
  std::vector<RbfParams<Scalar>> grid;
  if (dim < 1 || signal_variances.empty() || length_scales.empty() || noise_variances.empty()) return grid;
  std::size_t combos = 1;
  for (Eigen::Index d = 0; d < dim; ++d) combos *= length_scales.size();
  for (Scalar sv : signal_variances)
    for (std::size_t c = 0; c < combos; ++c) {
      Vector<Scalar> ls(dim);
      std::size_t rem = c;
      for (Eigen::Index d = dim - 1; d >= 0; --d) {
        ls[d] = length_scales[rem % length_scales.size()];
        rem /= length_scales.size();
      }
      for (Scalar nv : noise_variances) grid.push_back({sv, ls, nv});
    }
  return grid;
}

/// signal variance {0.25, 1, 4}, ARD length scales {0.3, 1, 3}, noise {1e-4, 1e-2, 1e-1}.
template <typename Scalar = double>
std::vector<RbfParams<Scalar>> default_hyper_grid(Eigen::Index dim) {
  return make_hyper_grid<Scalar>(dim, {Scalar(0.25), Scalar(1), Scalar(4)}, {Scalar(0.3), Scalar(1), Scalar(3)},
                                 {Scalar(1e-4), Scalar(1e-2), Scalar(1e-1)});
}

}  // namespace minisonde::gp
