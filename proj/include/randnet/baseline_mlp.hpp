#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "randnet/errors.hpp"
#include "randnet/estimator.hpp"
#include "randnet/mlp.hpp"
#include "randnet/numerics.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

/// First and second moment estimates, shaped like the parameters.
struct AdamState {
  MlpParams first_moment;
  MlpParams second_moment;
  std::int64_t step_count = 0;
  AdamConfig config;

  AdamState() = default;
  AdamState(const MlpParams& like, AdamConfig cfg)
      : first_moment(like.zeros_like()), second_moment(like.zeros_like()), config(cfg) {}
};

/// One bias-corrected adam update of `params` in place.
inline void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads) {
  ++state.step_count;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step_count);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  zip_blocks(
      [&](auto theta, auto m, auto v, auto g) {
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
        theta.array() -= c.lr * (m.array() / correct1) / ((v.array() / correct2).sqrt() + c.eps);
      },
      params, state.first_moment, state.second_moment, grads);
}

/// Glorot-uniform weights, U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)), and
/// zero biases.
inline MlpParams glorot_init(Eigen::Index input_dim, const std::vector<Eigen::Index>& widths, Activation act,
                             RngStream& rng) {
  MlpParams p(input_dim, widths, act);
  auto fill = [&rng](auto& m, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sample_uniform_interval(-limit, limit, rng);
  };
  for (auto& layer : p.layers)
    fill(layer.weight, static_cast<double>(layer.weight.cols()), static_cast<double>(layer.weight.rows()));
  fill(p.out_weight, static_cast<double>(p.out_weight.size()), 1.0);
  return p;
}

struct AdamTrainOptions {
  std::int64_t epochs = 1000;
  AdamConfig adam;
  // 0 means full batch
  std::int64_t batch_size = 0;
};

/// Fits an MLP by adam on the mean squared error. The returned estimator is
/// untruncated and carries the per-epoch training loss as its trace (the
/// loss before each epoch's updates).
inline TrainedEstimator train_adam(const LabeledDataset& data, const std::vector<Eigen::Index>& widths,
                                   Activation activation, const AdamTrainOptions& options, RngStream& rng) {
  data.validate();
  if (widths.empty()) throw DomainError("widths must be nonempty");
  if (options.epochs < 1) throw DomainError("epochs must be >= 1");

  MlpParams params = glorot_init(data.dimension(), widths, activation, rng);
  AdamState state(params, options.adam);
  const Matrix xt = data.x.transpose();
  const Eigen::Index n = data.size();
  const Eigen::Index batch = options.batch_size > 0 ? std::min<Eigen::Index>(options.batch_size, n) : n;

  TrainedEstimator est;
  est.trace.reserve(static_cast<std::size_t>(options.epochs));
  for (std::int64_t epoch = 0; epoch < options.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      double loss = 0.0;
      const MlpParams grads = mlp_gradient_columns(params, xt.middleCols(start, len), data.y.segment(start, len), &loss);
      if (!std::isfinite(loss)) throw NonFiniteLoss("training loss diverged at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(len);
      adam_step(state, params, grads);
    }
    est.trace.push_back(epoch_loss / static_cast<double>(n));
  }
  est.model = std::move(params);
  est.truncation = kNoTruncation;
  return est;
}

}  // namespace randnet
