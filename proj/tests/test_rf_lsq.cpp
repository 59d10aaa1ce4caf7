#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "randnet/estimator.hpp"
#include "randnet/rf_lsq.hpp"
#include "support.hpp"

using namespace randnet;
using randnet::testing::uniform_dataset;

namespace {

// Training MSE of the normal-equations solution computed in long double.
double oracle_training_mse(const Matrix& design, const Vector& y) {
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const LMatrix a = design.cast<long double>();
  const LVector b = y.cast<long double>();
  const LVector coef = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  return static_cast<double>((a * coef - b).squaredNorm() / static_cast<long double>(y.size()));
}

double condition_number(const Matrix& m) {
  const Eigen::JacobiSVD<Matrix> svd(m);
  const Vector s = svd.singularValues();
  return s[0] / s[s.size() - 1];
}

double raw_training_mse(const TrainedEstimator& est, const LabeledDataset& data) {
  return (est.raw_batch(data.x) - data.y).squaredNorm() / static_cast<double>(data.size());
}

}  // namespace

TEST(ProjectToInterval, Examples) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(project_to_interval(1.5 * pi), -0.5 * pi, 1e-15);
  EXPECT_DOUBLE_EQ(project_to_interval(-pi), pi);
  EXPECT_DOUBLE_EQ(project_to_interval(pi), pi);
  EXPECT_DOUBLE_EQ(project_to_interval(0.3), 0.3);
  EXPECT_NEAR(project_to_interval(0.3 + 20 * pi), 0.3, 1e-13);
}

TEST(ProjectToInterval, RangeAndCongruence) {
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double z = 1e3 * rng.normal();
    const double r = project_to_interval(z);
    ASSERT_GT(r, -std::numbers::pi);
    ASSERT_LE(r, std::numbers::pi);
    const double k = (z - r) / (2 * std::numbers::pi);
    ASSERT_NEAR(k, std::round(k), 1e-9);
  }
}

TEST(SampleBasis, Constraints) {
  RngStream rng(2);
  const RandomFeatureBasis basis = sample_basis(64, 16.0, 7, rng);
  std::set<double> first_coordinates;
  for (Eigen::Index j = 0; j < 64; ++j) {
    EXPECT_NEAR(basis.betas.row(j).norm(), 16.0, 1e-12 * 16.0);
    EXPECT_LE(std::abs(basis.gammas[j]), 16.0 * std::sqrt(7.0));
    first_coordinates.insert(basis.betas(j, 0));
  }
  EXPECT_EQ(first_coordinates.size(), 64u);
}

TEST(SampleProjectedBasis, ShiftsInsidePiInterval) {
  RngStream rng(3);
  const RandomFeatureBasis basis = sample_projected_basis(200, 4.0, 3, rng);
  EXPECT_EQ(basis.kind, BasisKind::projected);
  EXPECT_LE(basis.gammas.cwiseAbs().maxCoeff(), std::numbers::pi);
  EXPECT_TRUE(basis.betas.allFinite());
}

TEST(DesignMatrix, ConstantColumnAndCraftedHalf) {
  RngStream rng(4);
  RandomFeatureBasis basis = sample_basis(3, 2.0, 2, rng);
  const Eigen::RowVector2d x(0.3, 0.6);
  basis.gammas[1] = -basis.betas.row(1).dot(x);
  const Matrix design = design_matrix(basis, x);
  ASSERT_EQ(design.cols(), 4);
  EXPECT_EQ(design(0, 0), 1.0);
  EXPECT_NEAR(design(0, 2), 0.5, 1e-15);
}

TEST(DesignMatrix, ProjectedFeaturesArePeriodic) {
  RngStream rng(5);
  const RandomFeatureBasis basis = sample_projected_basis(5, 3.0, 3, rng);
  const Eigen::Vector3d x(0.2, 0.5, 0.9);
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const Vector beta = basis.betas.row(j).transpose();
    if (beta.norm() > 1e6) continue;
    const Vector shifted = x + 2 * std::numbers::pi * beta / beta.squaredNorm();
    EXPECT_NEAR(feature_row(basis, x)[j + 1], feature_row(basis, shifted)[j + 1], 1e-9);
  }
}

TEST(DesignMatrix, DimensionMismatchThrows) {
  RngStream rng(6);
  const RandomFeatureBasis basis = sample_basis(3, 2.0, 2, rng);
  EXPECT_THROW(design_matrix(basis, Matrix::Zero(4, 3)), DimensionMismatch);
}

TEST(FitLsq, RecoversRepresentableTarget) {
  RngStream rng(7);
  const RandomFeatureBasis basis = sample_basis(1, 3.0, 2, rng);
  LabeledDataset data = uniform_dataset(50, 2, rng);
  for (Eigen::Index i = 0; i < 50; ++i) data.y[i] = 2.0 + 3.0 * logistic(basis.betas.row(0).dot(data.x.row(i)) + basis.gammas[0]);
  const TrainedEstimator exact = fit_lsq(basis, data, 100.0, 0.0);
  EXPECT_LE(raw_training_mse(exact, data), 1e-16);
  const auto& model = std::get<RandomFeatureModel>(exact.model);
  EXPECT_NEAR(model.alphas[0], 2.0, 1e-6);
  EXPECT_NEAR(model.alphas[1], 3.0, 1e-6);
  const auto& ridged = std::get<RandomFeatureModel>(fit_lsq(basis, data, 100.0, 1e-12).model);
  EXPECT_NEAR(ridged.alphas[0], 2.0, 1e-6);
  EXPECT_NEAR(ridged.alphas[1], 3.0, 1e-6);
}

TEST(FitLsq, ConstantDataFittedExactly) {
  RngStream rng(8);
  for (double radius : {0.5, 8.0, 1024.0}) {
    const RandomFeatureBasis basis = sample_basis(16, radius, 3, rng);
    LabeledDataset data = uniform_dataset(30, 3, rng);
    data.y.setConstant(5.0);
    const TrainedEstimator est = fit_lsq(basis, data, 100.0);
    EXPECT_LT((est.predict_batch(data.x).array() - 5.0).abs().maxCoeff(), 1e-8) << "radius " << radius;
  }
}

TEST(FitLsq, MatchesNormalEquationsOracle) {
  // the oracle is only well defined for full-rank designs, so
  // numerically rank-deficient draws are replaced
  RngStream rng(9);
  int checked = 0;
  while (checked < 50) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 16);
    const Eigen::Index n = k + 2 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(59 - k));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 7);
    const double radius = 1.0 + 15.0 * rng.uniform01();
    const LabeledDataset data = uniform_dataset(n, d, rng);
    const RandomFeatureBasis basis = sample_basis(k, radius, d, rng);
    const Matrix design = design_matrix(basis, data.x);
    if (condition_number(design) > 1e6) continue;
    const TrainedEstimator est = fit_lsq(basis, data, 1e6);
    EXPECT_NEAR(raw_training_mse(est, data), oracle_training_mse(design, data.y), 1e-10) << "instance " << checked;
    ++checked;
  }
}

TEST(FitLsq, PerturbingCoefficientsNeverHelps) {
  RngStream rng(10);
  const LabeledDataset data = uniform_dataset(40, 3, rng);
  const RandomFeatureBasis basis = sample_basis(8, 2.0, 3, rng);
  TrainedEstimator est = fit_lsq(basis, data, 1e6, 0.0);
  const double best = raw_training_mse(est, data);
  auto& model = std::get<RandomFeatureModel>(est.model);
  const Vector alphas = model.alphas;
  for (int trial = 0; trial < 100; ++trial) {
    model.alphas = alphas + 1e-3 * randnet::testing::gaussian_vector(alphas.size(), rng);
    ASSERT_GE(raw_training_mse(est, data), best - 1e-15);
  }
}

TEST(FitLsq, ProjectedBasisFits) {
  RngStream rng(11);
  LabeledDataset data = uniform_dataset(60, 2, rng);
  for (Eigen::Index i = 0; i < 60; ++i) data.y[i] = std::sin(3 * data.x(i, 0)) + data.x(i, 1);
  const TrainedEstimator est = fit_lsq(sample_projected_basis(16, 2.0, 2, rng), data, 10.0);
  EXPECT_LT(raw_training_mse(est, data), 0.5);
  EXPECT_EQ(std::get<RandomFeatureModel>(est.model).basis.kind, BasisKind::projected);
}

TEST(FitLsq, TruncationApplied) {
  RngStream rng(12);
  LabeledDataset data = uniform_dataset(20, 1, rng);
  data.y.setConstant(50.0);
  const TrainedEstimator est = fit_lsq(sample_basis(2, 1.0, 1, rng), data, 3.0);
  EXPECT_EQ(est.predict_batch(data.x).maxCoeff(), 3.0);
  EXPECT_THROW(fit_lsq(sample_basis(2, 1.0, 1, rng), data, 0.0), DomainError);
}

TEST(EstimatorJson, RoundTripIsExact) {
  RngStream rng(13);
  for (int instance = 0; instance < 20; ++instance) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 5);
    const LabeledDataset data = uniform_dataset(25, d, rng);
    const bool projected = instance % 2 == 1;
    const RandomFeatureBasis basis =
        projected ? sample_projected_basis(6, 3.0, d, rng) : sample_basis(6, 3.0, d, rng);
    const TrainedEstimator est = fit_lsq(basis, data, 1.5 + instance);
    const TrainedEstimator back = estimator_from_json(nlohmann::json::parse(to_json(est).dump()));
    EXPECT_EQ(back.truncation, est.truncation);
    EXPECT_EQ(back.predict_batch(data.x), est.predict_batch(data.x));
    EXPECT_EQ(to_json(back).dump(), to_json(est).dump());
  }
}

TEST(EstimatorJson, UntruncatedAndShallowKinds) {
  RngStream rng(14);
  TrainedEstimator est;
  est.model = randnet::testing::random_net(3, 2, rng);
  const auto doc = to_json(est);
  EXPECT_EQ(doc.at("kind"), "shallow");
  EXPECT_TRUE(doc.at("beta_n").is_null());
  EXPECT_EQ(doc.at("alphas").size(), 4u);
  const TrainedEstimator back = estimator_from_json(doc);
  EXPECT_EQ(std::get<ShallowNetParams>(back.model).flatten(), std::get<ShallowNetParams>(est.model).flatten());
  EXPECT_THROW(estimator_from_json(nlohmann::json{{"kind", "tree"}, {"beta_n", nullptr}}), DomainError);
}
