#pragma once

#include <cmath>
#include <string_view>
#include <type_traits>
#include <vector>

#include "randnet/errors.hpp"
#include "randnet/numerics.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

enum class Activation { relu, sigmoid };

inline std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "sigmoid"; }

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Fully connected network with L hidden layers and a scalar linear output:
///
///   h_0 = x,  h_s = act(W_s h_(s-1) + b_s),  f(x) = w_out . h_L + b_out.
struct MlpParams {
  std::vector<DenseLayer> layers;
  Vector out_weight;
  double out_bias = 0.0;
  Activation activation = Activation::sigmoid;

  MlpParams() = default;

  /// Zero-initialized network with the given input dimension and hidden widths.
  MlpParams(Eigen::Index input_dim, const std::vector<Eigen::Index>& widths, Activation act)
      : activation(act) {
    if (widths.empty()) throw DomainError("network needs at least one hidden layer");
    Eigen::Index fan_in = input_dim;
    for (auto w : widths) {
      if (w < 1) throw DomainError("hidden widths must be positive");
      layers.push_back({Matrix::Zero(w, fan_in), Vector::Zero(w)});
      fan_in = w;
    }
    out_weight = Vector::Zero(fan_in);
  }

  [[nodiscard]] Eigen::Index input_dimension() const { return layers.front().weight.cols(); }

  [[nodiscard]] std::vector<Eigen::Index> widths() const {
    std::vector<Eigen::Index> out;
    for (const auto& l : layers) out.push_back(l.weight.rows());
    return out;
  }

  [[nodiscard]] MlpParams zeros_like() const {
    MlpParams z(input_dimension(), widths(), activation);
    return z;
  }

  void validate() const {
    if (layers.empty()) throw DimensionMismatch("network has no hidden layers");
    Eigen::Index fan_in = layers.front().weight.cols();
    for (const auto& l : layers) {
      if (l.weight.cols() != fan_in || l.bias.size() != l.weight.rows())
        throw DimensionMismatch("inconsistent layer width chain");
      fan_in = l.weight.rows();
    }
    if (out_weight.size() != fan_in) throw DimensionMismatch("output layer width mismatch");
  }

  /// Applies fn to matching flat views of every parameter block of each
  /// argument, in layer order followed by the output layer.
  template <typename Fn, typename... Rest>
  friend void zip_blocks(Fn&& fn, MlpParams& first, Rest&... rest) {
    auto view = [](auto& m) {
      if constexpr (std::is_const_v<std::remove_reference_t<decltype(m)>>)
        return Eigen::Map<const Vector>(m.data(), m.size());
      else
        return Eigen::Map<Vector>(m.data(), m.size());
    };
    auto scalar = [](auto& v) {
      if constexpr (std::is_const_v<std::remove_reference_t<decltype(v)>>)
        return Eigen::Map<const Vector>(&v, 1);
      else
        return Eigen::Map<Vector>(&v, 1);
    };
    for (std::size_t s = 0; s < first.layers.size(); ++s) {
      fn(view(first.layers[s].weight), view(rest.layers[s].weight)...);
      fn(view(first.layers[s].bias), view(rest.layers[s].bias)...);
    }
    fn(view(first.out_weight), view(rest.out_weight)...);
    fn(scalar(first.out_bias), scalar(rest.out_bias)...);
  }
};

namespace detail {

inline void activate(Matrix& z, Activation a) {
  if (a == Activation::relu)
    z = z.cwiseMax(0.0);
  else
    z = z.unaryExpr([](double v) { return logistic(v); });
}

// Derivative of the activation written in terms of its output h.
// relu'(0) is taken as 0.
inline Matrix activation_slope(const Matrix& h, Activation a) {
  if (a == Activation::relu) return (h.array() > 0.0).cast<double>().matrix();
  return (h.array() * (1.0 - h.array())).matrix();
}

// Hidden outputs h_1..h_L for a batch given column-wise (d x n).
inline std::vector<Matrix> mlp_hidden(const MlpParams& params, const Eigen::Ref<const Matrix>& xt) {
  std::vector<Matrix> hidden;
  hidden.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    Matrix z;
    if (hidden.empty())
      z.noalias() = layer.weight * xt;
    else
      z.noalias() = layer.weight * hidden.back();
    z.colwise() += layer.bias;
    activate(z, params.activation);
    hidden.push_back(std::move(z));
  }
  return hidden;
}

}  // namespace detail

/// Outputs for a batch stored one observation per row.
inline Vector mlp_forward_batch(const MlpParams& params, const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != params.input_dimension()) throw DimensionMismatch("input dimension does not match network");
  const auto hidden = detail::mlp_hidden(params, x.transpose());
  Vector out = hidden.back().transpose() * params.out_weight;
  out.array() += params.out_bias;
  return out;
}

inline double mlp_forward(const MlpParams& params, const Eigen::Ref<const Vector>& x) {
  return mlp_forward_batch(params, x.transpose())[0];
}

/// Gradient of the mean squared error over a batch given column-wise
/// (xt is d x n). Returns the loss through `loss` when non-null.
inline MlpParams mlp_gradient_columns(const MlpParams& params, const Eigen::Ref<const Matrix>& xt,
                                      const Eigen::Ref<const Vector>& y, double* loss = nullptr) {
  const Eigen::Index n = xt.cols();
  if (n < 1) throw TooSmall("empty batch");
  if (xt.rows() != params.input_dimension()) throw DimensionMismatch("input dimension does not match network");
  if (y.size() != n) throw DimensionMismatch("batch responses differ in length");

  const auto hidden = detail::mlp_hidden(params, xt);
  Eigen::RowVectorXd residual = params.out_weight.transpose() * hidden.back();
  residual.array() += params.out_bias - y.transpose().array();
  if (loss) *loss = residual.squaredNorm() / static_cast<double>(n);

  MlpParams grad = params.zeros_like();
  const Eigen::RowVectorXd delta_out = (2.0 / static_cast<double>(n)) * residual;
  grad.out_weight.noalias() = hidden.back() * delta_out.transpose();
  grad.out_bias = delta_out.sum();

  Matrix delta = params.out_weight * delta_out;
  for (std::size_t s = params.layers.size(); s-- > 0;) {
    delta.array() *= detail::activation_slope(hidden[s], params.activation).array();
    if (s > 0)
      grad.layers[s].weight.noalias() = delta * hidden[s - 1].transpose();
    else
      grad.layers[s].weight.noalias() = delta * xt.transpose();
    grad.layers[s].bias = delta.rowwise().sum();
    if (s > 0) delta = params.layers[s].weight.transpose() * delta;
  }
  return grad;
}

/// Gradient of (1/n) sum_i (f(X_i) - Y_i)^2 by reverse-mode accumulation.
inline MlpParams mlp_gradient(const MlpParams& params, const LabeledDataset& batch) {
  if (batch.size() < 1) throw TooSmall("empty batch");
  if (batch.dimension() != params.input_dimension())
    throw DimensionMismatch("input dimension does not match network");
  return mlp_gradient_columns(params, batch.x.transpose(), batch.y);
}

/// The same network as a one-hidden-layer MLP. Equal in function to the
/// shallow net only for the sigmoid activation.
inline MlpParams to_mlp(const ShallowNetParams& net) {
  MlpParams mlp(net.dimension(), {net.hidden()}, Activation::sigmoid);
  mlp.layers[0].weight = net.beta;
  mlp.layers[0].bias = net.gamma;
  mlp.out_weight = net.alpha;
  mlp.out_bias = net.alpha0;
  return mlp;
}

}  // namespace randnet
