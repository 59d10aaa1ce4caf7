#pragma once

#include "randnet/errors.hpp"
#include "randnet/estimator.hpp"
#include "randnet/numerics.hpp"
#include "randnet/random_features.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

/// Least squares estimator over the span of a frozen random basis plus a
/// constant, truncated at `beta_n`. With ridge 0 the minimum-norm solution
/// is returned for rank-deficient designs.
inline TrainedEstimator fit_lsq(const RandomFeatureBasis& basis, const LabeledDataset& data, double beta_n,
                                double ridge = 0.0) {
  data.validate();
  if (!(beta_n > 0.0)) throw DomainError("truncation level must be positive");
  const Matrix design = design_matrix(basis, data.x);
  TrainedEstimator est;
  est.model = RandomFeatureModel{basis, solve_least_squares(design, data.y, ridge)};
  est.truncation = beta_n;
  return est;
}

}  // namespace randnet
