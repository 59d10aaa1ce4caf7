#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

#include "randnet/errors.hpp"
#include "randnet/numerics.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

enum class BasisKind { plain, projected };

inline std::string_view to_string(BasisKind kind) {
  return kind == BasisKind::plain ? "plain" : "projected";
}

/// Frozen hidden layer of a random-feature network.
///
/// plain:     feature_j(x) = logistic(beta_j . x + gamma_j)
/// projected: feature_j(x) = logistic(scale * (Proj(beta_j . x) + gamma_j))
///
/// where Proj reduces its argument modulo 2 pi into (-pi, pi]. `betas` holds
/// one inner weight vector per row.
struct RandomFeatureBasis {
  BasisKind kind = BasisKind::plain;
  Matrix betas;
  Vector gammas;
  double scale = 1.0;

  [[nodiscard]] Eigen::Index size() const { return gammas.size(); }
  [[nodiscard]] Eigen::Index dimension() const { return betas.cols(); }
};

/// Unique representative of z modulo 2 pi in (-pi, pi].
inline double project_to_interval(double z) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(z, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

/// Inner weights uniform on the radius-`radius` sphere, biases uniform on
/// [-radius sqrt(d), radius sqrt(d)].
inline RandomFeatureBasis sample_basis(Eigen::Index k, double radius, Eigen::Index d, RngStream& rng) {
  if (k < 1) throw DomainError("basis needs at least one feature");
  if (d < 1) throw DomainError("basis dimension must be >= 1");
  RandomFeatureBasis basis{BasisKind::plain, Matrix(k, d), Vector(k), radius};
  const double bias_range = radius * std::sqrt(static_cast<double>(d));
  for (Eigen::Index j = 0; j < k; ++j) {
    basis.betas.row(j) = sample_uniform_sphere(d, radius, rng).transpose();
    basis.gammas[j] = sample_uniform_interval(-bias_range, bias_range, rng);
  }
  return basis;
}

inline RandomFeatureBasis sample_projected_basis(Eigen::Index k, double scale, Eigen::Index d,
                                                 RngStream& rng) {
  if (k < 1) throw DomainError("basis needs at least one feature");
  if (d < 1) throw DomainError("basis dimension must be >= 1");
  RandomFeatureBasis basis{BasisKind::projected, Matrix(k, d), Vector(k), scale};
  for (Eigen::Index j = 0; j < k; ++j) {
    basis.betas.row(j) = sample_projected_direction(d, rng).transpose();
    basis.gammas[j] = sample_uniform_interval(-std::numbers::pi, std::numbers::pi, rng);
  }
  return basis;
}

/// n x (K + 1) design matrix; column 0 is the constant 1.
inline Matrix design_matrix(const RandomFeatureBasis& basis, const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != basis.dimension()) throw DimensionMismatch("input dimension does not match basis");
  Matrix design(x.rows(), basis.size() + 1);
  design.col(0).setOnes();
  auto features = design.rightCols(basis.size());
  features.noalias() = x * basis.betas.transpose();
  if (basis.kind == BasisKind::plain) {
    features.rowwise() += basis.gammas.transpose();
    features = features.unaryExpr([](double v) { return logistic(v); });
  } else {
    const double scale = basis.scale;
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
      const double shift = basis.gammas[j];
      features.col(j) = features.col(j).unaryExpr(
          [=](double v) { return logistic(scale * (project_to_interval(v) + shift)); });
    }
  }
  return design;
}

inline Vector feature_row(const RandomFeatureBasis& basis, const Eigen::Ref<const Vector>& x) {
  return design_matrix(basis, x.transpose()).row(0).transpose();
}

/// A basis plus its outer weights (alpha0, alpha_1..K).
struct RandomFeatureModel {
  RandomFeatureBasis basis;
  Vector alphas;

  [[nodiscard]] Vector evaluate(const Eigen::Ref<const Matrix>& x) const { return design_matrix(basis, x) * alphas; }
};

}  // namespace randnet
