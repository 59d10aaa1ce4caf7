#pragma once

#include <algorithm>
#include <cmath>

#include "randnet/errors.hpp"
#include "randnet/numerics.hpp"

namespace randnet {

/// Weights of a one-hidden-layer logistic network
///
///   f(x) = alpha0 + sum_k alpha_k * logistic(beta_k . x + gamma_k).
///
/// `beta` stores one inner weight vector per row (K x d).
struct ShallowNetParams {
  double alpha0 = 0.0;
  Vector alpha;
  Matrix beta;
  Vector gamma;

  ShallowNetParams() = default;
  ShallowNetParams(Eigen::Index hidden, Eigen::Index dim)
      : alpha(Vector::Zero(hidden)), beta(Matrix::Zero(hidden, dim)), gamma(Vector::Zero(hidden)) {}

  [[nodiscard]] Eigen::Index hidden() const { return alpha.size(); }
  [[nodiscard]] Eigen::Index dimension() const { return beta.cols(); }
  /// Number of scalar weights, 1 + K (d + 2).
  [[nodiscard]] Eigen::Index weight_count() const { return 1 + hidden() * (dimension() + 2); }

  void validate() const {
    if (hidden() < 1) throw DimensionMismatch("network needs at least one hidden unit");
    if (beta.rows() != hidden() || gamma.size() != hidden())
      throw DimensionMismatch("inconsistent hidden-layer sizes");
    if (!std::isfinite(alpha0) || !alpha.allFinite() || !beta.allFinite() || !gamma.allFinite())
      throw NonFiniteInput("network weights contain NaN or Inf");
  }

  /// Flat layout (alpha0, alpha_1..K, beta_1..K row by row, gamma_1..K).
  [[nodiscard]] Vector flatten() const {
    Vector w(weight_count());
    const Eigen::Index k = hidden();
    const Eigen::Index d = dimension();
    w[0] = alpha0;
    w.segment(1, k) = alpha;
    for (Eigen::Index j = 0; j < k; ++j) w.segment(1 + k + j * d, d) = beta.row(j).transpose();
    w.tail(k) = gamma;
    return w;
  }

  static ShallowNetParams unflatten(const Eigen::Ref<const Vector>& w, Eigen::Index hidden,
                                    Eigen::Index dim) {
    if (w.size() != 1 + hidden * (dim + 2)) throw DimensionMismatch("flat weight vector has wrong length");
    ShallowNetParams p(hidden, dim);
    p.alpha0 = w[0];
    p.alpha = w.segment(1, hidden);
    for (Eigen::Index j = 0; j < hidden; ++j) p.beta.row(j) = w.segment(1 + hidden + j * dim, dim).transpose();
    p.gamma = w.tail(hidden);
    return p;
  }
};

/// Observations stored one per row of `x`, responses in `y`.
struct LabeledDataset {
  Matrix x;
  Vector y;

  [[nodiscard]] Eigen::Index size() const { return y.size(); }
  [[nodiscard]] Eigen::Index dimension() const { return x.cols(); }

  void validate() const {
    if (y.size() < 1) throw TooSmall("dataset is empty");
    if (x.rows() != y.size()) throw DimensionMismatch("observation and response counts differ");
    if (!x.allFinite() || !y.allFinite()) throw NonFiniteInput("dataset contains NaN or Inf");
  }

  [[nodiscard]] LabeledDataset slice(Eigen::Index start, Eigen::Index count) const {
    return {x.middleRows(start, count), y.segment(start, count)};
  }
};

/// 1 / (1 + exp(-x)) without overflow for any finite x.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// T_level(y) = max(min(y, level), -level).
inline double truncate(double level, double y) { return std::max(std::min(y, level), -level); }

namespace detail {

inline void check_dimension(const ShallowNetParams& params, Eigen::Index d) {
  if (params.dimension() != d) throw DimensionMismatch("input dimension does not match network");
}

// n x K matrix of hidden activations logistic(beta_k . x_i + gamma_k).
inline Matrix hidden_activations(const ShallowNetParams& params, const Eigen::Ref<const Matrix>& x) {
  Matrix pre = x * params.beta.transpose();
  pre.rowwise() += params.gamma.transpose();
  return pre.unaryExpr([](double v) { return logistic(v); });
}

}  // namespace detail

inline double forward(const ShallowNetParams& params, const Eigen::Ref<const Vector>& x) {
  detail::check_dimension(params, x.size());
  double value = params.alpha0;
  for (Eigen::Index k = 0; k < params.hidden(); ++k)
    value += params.alpha[k] * logistic(params.beta.row(k).dot(x) + params.gamma[k]);
  return value;
}

/// Network outputs on every row of `x`.
inline Vector forward_batch(const ShallowNetParams& params, const Eigen::Ref<const Matrix>& x) {
  detail::check_dimension(params, x.cols());
  Vector out = detail::hidden_activations(params, x) * params.alpha;
  out.array() += params.alpha0;
  return out;
}

namespace detail {

inline void check_risk_args(const ShallowNetParams& params, const LabeledDataset& data, double c2,
                            Eigen::Index k_n) {
  check_dimension(params, data.dimension());
  if (k_n != params.hidden()) throw DimensionMismatch("K_n differs from the network's hidden width");
  if (!(c2 >= 0.0)) throw DomainError("penalty constant must be nonnegative");
}

}  // namespace detail

/// F(w) = (1/n) sum_i (Y_i - f_w(X_i))^2 + (c2 / K_n) sum_{k=0..K_n} alpha_k^2.
/// The penalty includes the outer bias alpha0.
inline double penalized_risk(const ShallowNetParams& params, const LabeledDataset& data, double c2,
                             Eigen::Index k_n) {
  detail::check_risk_args(params, data, c2, k_n);
  const Vector residual = forward_batch(params, data.x) - data.y;
  const double penalty = params.alpha0 * params.alpha0 + params.alpha.squaredNorm();
  return residual.squaredNorm() / static_cast<double>(data.size()) +
         c2 / static_cast<double>(k_n) * penalty;
}

/// Analytic gradient of `penalized_risk`, returned in parameter shape.
/// When `risk` is non-null the risk at `params` is written there as well.
inline ShallowNetParams risk_gradient(const ShallowNetParams& params, const LabeledDataset& data,
                                      double c2, Eigen::Index k_n, double* risk = nullptr) {
  detail::check_risk_args(params, data, c2, k_n);
  const double n = static_cast<double>(data.size());
  const double shrink = 2.0 * c2 / static_cast<double>(k_n);

  const Matrix act = detail::hidden_activations(params, data.x);
  Vector residual = act * params.alpha;
  residual.array() += params.alpha0 - data.y.array();
  if (risk)
    *risk = residual.squaredNorm() / n +
            c2 / static_cast<double>(k_n) * (params.alpha0 * params.alpha0 + params.alpha.squaredNorm());

  ShallowNetParams grad(params.hidden(), params.dimension());
  grad.alpha0 = 2.0 / n * residual.sum() + shrink * params.alpha0;
  grad.alpha = 2.0 / n * (act.transpose() * residual) + shrink * params.alpha;

  // chain[i, k] = r_i * alpha_k * logistic'(pre_ik), logistic' = s (1 - s)
  Matrix chain = act.array() * (1.0 - act.array());
  chain.array().colwise() *= residual.array();
  chain.array().rowwise() *= params.alpha.transpose().array();
  grad.beta = 2.0 / n * (chain.transpose() * data.x);
  grad.gamma = 2.0 / n * chain.colwise().sum().transpose();
  return grad;
}

}  // namespace randnet
