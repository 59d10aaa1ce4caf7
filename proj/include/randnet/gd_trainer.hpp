#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include <Eigen/Eigenvalues>

#include "randnet/errors.hpp"
#include "randnet/estimator.hpp"
#include "randnet/numerics.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

/// Positive constants of the gradient-descent schedule. Any positive values
/// are admissible; the defaults keep small runs finite.
struct ScheduleConstants {
  double c2 = 1.0;  // penalty weight
  double c3 = 1.0;  // bound on |alpha0| at init
  double c4 = 1.0;  // bound on K |alpha_k| at init
  double c5 = 2.0;  // truncation level beta_n = c5 log n
  double c7 = 1.0;  // K_n = ceil(c7 sqrt n)
  double c8 = 1.0;  // L_n = c8 (log n)^6 K_n^(5/2)
};

/// Every quantity the gradient-descent estimator needs for a sample of
/// size n in dimension d. Logarithms are natural.
struct TheoreticalSchedule {
  std::int64_t n = 0;
  std::int64_t d = 0;
  std::int64_t K_n = 0;
  double B_n = 0.0;
  double L_n = 0.0;
  double lambda_n = 0.0;
  std::uint64_t t_n = 0;
  double beta_n = 0.0;
  ScheduleConstants constants;

  /// Replaces the smoothness scale and the step size 1 / L with it.
  void set_smoothness(double L) {
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("smoothness scale must be positive and finite");
    L_n = L;
    lambda_n = 1.0 / L;
  }
};

inline TheoreticalSchedule schedule_from_n(std::int64_t n, std::int64_t d, const ScheduleConstants& c = {}) {
  if (n < 2) throw DomainError("schedule needs n >= 2 so that log n > 0");
  if (d < 1) throw DomainError("dimension must be >= 1");
  for (double v : {c.c2, c.c3, c.c4, c.c5, c.c7, c.c8})
    if (!(v > 0.0)) throw DomainError("schedule constants must be positive");

  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  TheoreticalSchedule s;
  s.n = n;
  s.d = d;
  s.constants = c;
  s.K_n = static_cast<std::int64_t>(std::ceil(c.c7 * std::sqrt(nn)));
  const double k = static_cast<double>(s.K_n);
  s.B_n = log_n * log_n * k * nn * nn / std::sqrt(static_cast<double>(d));
  s.L_n = c.c8 * std::pow(log_n, 6) * std::pow(k, 2.5);
  s.lambda_n = 1.0 / s.L_n;
  s.t_n = static_cast<std::uint64_t>(std::ceil(k * log_n * log_n * s.L_n));
  s.beta_n = c.c5 * log_n;
  return s;
}

enum class OuterInit { zeros, uniform_small };

/// Starting weights: inner weights uniform on the radius-B_n sphere, inner
/// biases uniform on [-B_n sqrt d, B_n sqrt d]. Outer weights are zero, or
/// alpha0 uniform on [-c3, c3] and alpha_k uniform on [-c4/K_n, c4/K_n].
inline ShallowNetParams init_weights(const TheoreticalSchedule& s, OuterInit mode, RngStream& rng) {
  if (s.K_n < 1 || s.d < 1) throw DomainError("schedule has no hidden units");
  ShallowNetParams p(s.K_n, s.d);
  const double bias_range = s.B_n * std::sqrt(static_cast<double>(s.d));
  for (Eigen::Index k = 0; k < s.K_n; ++k) {
    p.beta.row(k) = sample_uniform_sphere(s.d, s.B_n, rng).transpose();
    p.gamma[k] = sample_uniform_interval(-bias_range, bias_range, rng);
  }
  if (mode == OuterInit::uniform_small) {
    p.alpha0 = sample_uniform_interval(-s.constants.c3, s.constants.c3, rng);
    const double bound = s.constants.c4 / static_cast<double>(s.K_n);
    for (Eigen::Index k = 0; k < s.K_n; ++k) p.alpha[k] = sample_uniform_interval(-bound, bound, rng);
  }
  return p;
}

struct GdOptions {
  OuterInit init = OuterInit::zeros;
  bool record_trace = false;
};

/// Runs w(t+1) = w(t) - lambda_n grad F(w(t)) starting from `start`.
/// With tracing the result holds F(w(0)), ..., F(w(steps)).
inline TrainedEstimator run_gradient_descent(ShallowNetParams start, const LabeledDataset& data,
                                             const TheoreticalSchedule& s, std::uint64_t steps,
                                             bool record_trace) {
  data.validate();
  start.validate();
  const double c2 = s.constants.c2;
  const Eigen::Index k_n = start.hidden();
  TrainedEstimator est;
  est.truncation = s.beta_n;
  if (record_trace) est.trace.reserve(steps + 1);

  ShallowNetParams w = std::move(start);
  double risk = 0.0;
  for (std::uint64_t t = 0;; ++t) {
    const ShallowNetParams grad = risk_gradient(w, data, c2, k_n, &risk);
    if (!std::isfinite(risk)) throw NonFiniteRisk("F(w) is not finite at step " + std::to_string(t));
    if (record_trace) est.trace.push_back(risk);
    if (t == steps) break;
    w.alpha0 -= s.lambda_n * grad.alpha0;
    w.alpha -= s.lambda_n * grad.alpha;
    w.beta -= s.lambda_n * grad.beta;
    w.gamma -= s.lambda_n * grad.gamma;
  }
  est.model = std::move(w);
  return est;
}

/// Gradient-descent estimator: random initialization followed by
/// min(t_n, step_cap) fixed-size steps; predictions truncated at beta_n.
inline TrainedEstimator train_gd(const LabeledDataset& data, const TheoreticalSchedule& s,
                                 std::optional<std::uint64_t> step_cap, RngStream& rng,
                                 const GdOptions& options = {}) {
  if (data.dimension() != s.d) throw DimensionMismatch("data dimension differs from schedule");
  if (step_cap && *step_cap > s.t_n) throw DomainError("step cap exceeds t_n");
  const std::uint64_t steps = step_cap ? *step_cap : s.t_n;
  return run_gradient_descent(init_weights(s, options.init, rng), data, s, steps, options.record_trace);
}

/// Conservative smoothness constant for F near `at`: the spectral norm of a
/// central-difference Hessian of the analytic gradient, times `safety`.
inline double estimate_smoothness(const ShallowNetParams& at, const LabeledDataset& data, double c2,
                                  double safety = 4.0, double h = 1e-5) {
  const Eigen::Index k = at.hidden();
  const Eigen::Index d = at.dimension();
  const Vector w = at.flatten();
  const Eigen::Index dim = w.size();
  Matrix hessian(dim, dim);
  Vector probe = w;
  for (Eigen::Index i = 0; i < dim; ++i) {
    probe[i] = w[i] + h;
    const Vector up = risk_gradient(ShallowNetParams::unflatten(probe, k, d), data, c2, k).flatten();
    probe[i] = w[i] - h;
    const Vector down = risk_gradient(ShallowNetParams::unflatten(probe, k, d), data, c2, k).flatten();
    probe[i] = w[i];
    hessian.col(i) = (up - down) / (2.0 * h);
  }
  const Matrix sym = 0.5 * (hessian + hessian.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return safety * eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace randnet
