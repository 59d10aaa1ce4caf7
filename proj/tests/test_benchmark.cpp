#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "randnet/benchmark.hpp"
#include "support.hpp"

using namespace randnet;

namespace {

// Second, straight-line coding of the six targets in long double.
long double reference_target(int index, const Vector& v) {
  std::vector<long double> x(v.data(), v.data() + v.size());
  switch (index) {
    case 1: {
      long double sq = 0, prod = 1;
      for (std::size_t i = 0; i < 7; ++i) {
        sq += x[i] * x[i];
        prod *= std::cos(x[i] / std::sqrt(static_cast<long double>(i + 1)));
      }
      return sq / 4000 - prod;
    }
    case 2: {
      long double sq = 0;
      for (auto xi : x) sq += xi * xi;
      return std::exp(sq / 2);
    }
    case 3: {
      long double s = 0;
      for (std::size_t i = 0; i + 1 < 7; ++i)
        s += 10 * (std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(x[i] - 1, 2));
      return s;
    }
    case 4:
      return std::tanh(0.2L * x[0] + 0.9L * x[1] + x[2] + x[3] + 0.2L * x[4] + 0.6L * x[5]);
    case 5: {
      long double sq = 0;
      for (auto xi : x) sq += xi * xi;
      return 1 / (1 + std::sqrt(sq) / 4) + x[6] * x[6] + x[3] * x[4] * x[1];
    }
    case 6: {
      const long double pi = std::numbers::pi_v<long double>;
      const long double angle = pi / (1 + std::exp(x[0] * x[0] + 2 * x[1] + std::sin(6 * x[3] * x[3] - 3)));
      return std::cos(angle) / std::sin(angle) +
             std::exp(3 * x[2] + 2 * x[3] - 5 * x[4] + std::sqrt(x[5] + 0.9L * x[6] + 0.1L));
    }
  }
  return 0;
}

SimulationSpec small_spec(int target, std::vector<std::string> ids) {
  SimulationSpec s;
  s.target = target;
  s.n = 60;
  s.noise_sigma = 0.05;
  s.repetitions = 3;
  s.eval_N = 2000;
  s.estimator_ids = std::move(ids);
  s.options.lsq_grid = {{4, 8}, {1, 4, 64}, 2};
  s.options.widths = {4, 8};
  s.options.adam.epochs = 30;
  s.options.avg_runs = 10;
  s.options.threads = 1;
  return s;
}

}  // namespace

TEST(Targets, Examples) {
  EXPECT_EQ(eval_target(2, Vector::Zero(7)), 1.0);
  EXPECT_EQ(eval_target(4, Vector::Zero(6)), 0.0);
  EXPECT_EQ(eval_target(3, Vector::Ones(7)), 0.0);
  EXPECT_EQ(eval_target(1, Vector::Zero(7)), -1.0);
}

TEST(Targets, DimensionsAndErrors) {
  const int dims[] = {7, 7, 7, 6, 10, 7};
  for (int i = 1; i <= 6; ++i) EXPECT_EQ(target_dimension(i), dims[i - 1]);
  EXPECT_THROW(target_dimension(7), DomainError);
  EXPECT_THROW(eval_target(4, Vector::Zero(7)), DimensionMismatch);
  EXPECT_THROW(eval_target(1, Vector::Zero(7), M1Divisor::paper), DomainError);
}

TEST(Targets, AgreeWithIndependentEvaluator) {
  RngStream rng(1);
  for (int t = 1; t <= 6; ++t) {
    const Matrix x = sample_unit_cube(1000, target_dimension(t), rng);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Vector p = x.row(i).transpose();
      const long double ref = reference_target(t, p);
      const double tol = 1e-12 * std::max(1.0L, std::abs(ref));
      ASSERT_NEAR(eval_target(t, p), static_cast<double>(ref), tol) << "m" << t << " point " << i;
    }
  }
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_EQ(quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_EQ(interquartile_range({1, 2, 3, 4}), 1.5);
  EXPECT_EQ(interquartile_range({7}), 0.0);
  EXPECT_EQ(median({5}), 5.0);
  EXPECT_THROW(quantile({}, 0.5), TooSmall);
}

TEST(CalibrateLambda, ScaleHomogeneityOnM4) {
  RngStream a(2), b(2), c(3);
  const double base = calibrate_lambda(4, a, 10, 20000);
  EXPECT_NEAR(calibrate_lambda(4, b, 10, 20000, M1Divisor::griewank, 2.0), 2.0 * base, 1e-12);
  // an independent stream agrees within Monte-Carlo error
  EXPECT_NEAR(calibrate_lambda(4, c, 10, 20000, M1Divisor::griewank, 2.0) / (2.0 * base), 1.0, 0.02);
}

TEST(GenerateDataset, ZeroNoiseIsExact) {
  SimulationSpec s;
  s.target = 5;
  s.n = 50;
  s.noise_sigma = 0.0;
  const LabeledDataset data = generate_dataset(s, 0);
  EXPECT_EQ(data.dimension(), 10);
  EXPECT_EQ(data.y, eval_target_batch(5, data.x));
  EXPECT_GE(data.x.minCoeff(), 0.0);
  EXPECT_LT(data.x.maxCoeff(), 1.0);
}

TEST(GenerateDataset, NoiseScale) {
  SimulationSpec s;
  s.target = 2;
  s.n = 100000;
  s.noise_sigma = 0.20;
  const LabeledDataset data = generate_dataset(s, 0);
  const Vector eps = data.y - eval_target_batch(2, data.x);
  const double scale = 0.20 * published_lambda(2);
  EXPECT_LT(std::abs(eps.mean()), 4 * scale / std::sqrt(1e5));
  const double sd = std::sqrt((eps.array() - eps.mean()).square().sum() / (1e5 - 1));
  EXPECT_NEAR(sd / scale, 1.0, 0.02);
}

TEST(GenerateDataset, RepetitionsAreReproducibleAndDistinct) {
  SimulationSpec s;
  s.target = 4;
  EXPECT_EQ(generate_dataset(s, 3).y, generate_dataset(s, 3).y);
  EXPECT_NE(generate_dataset(s, 3).y, generate_dataset(s, 4).y);
  SimulationSpec other = s;
  other.master_seed = 1;
  EXPECT_NE(generate_dataset(s, 3).y, generate_dataset(other, 3).y);
}

TEST(SplitSample, Sizes) {
  RngStream rng(4);
  for (auto [n, learn] : {std::pair{200, 160}, {400, 320}, {5, 4}, {11, 9}}) {
    const auto [train, test] = split_sample(randnet::testing::uniform_dataset(n, 2, rng));
    EXPECT_EQ(train.size(), learn);
    EXPECT_EQ(test.size(), n - learn);
  }
  EXPECT_THROW(split_sample(randnet::testing::uniform_dataset(4, 2, rng)), TooSmall);
}

TEST(SplitSample, KeepsGenerationOrder) {
  RngStream rng(5);
  const LabeledDataset data = randnet::testing::uniform_dataset(10, 2, rng);
  const auto [train, test] = split_sample(data);
  EXPECT_EQ(train.y, data.y.head(8));
  EXPECT_EQ(test.y, data.y.tail(2));
}

TEST(LsqGrid, DefaultCandidateCount) {
  const LsqGrid grid;
  EXPECT_EQ(grid.hidden.size(), 6u);
  EXPECT_EQ(grid.radii.size(), 21u);
  EXPECT_EQ(grid.radii.back(), 131072.0);
  EXPECT_EQ(grid.candidate_count(), 1260u);
}

TEST(SelectLsqModel, ReturnsArgminAndIsDeterministic) {
  SimulationSpec s;
  s.target = 4;
  s.n = 100;
  const LabeledDataset data = generate_dataset(s, 0);
  const auto [train, test] = split_sample(data);
  const LsqGrid grid{{4, 16}, {1, 8, 512}, 3};
  const RngStream rng(6);
  const Selection sel = select_lsq_model(train, test, grid, rng);
  EXPECT_EQ(sel.scored, grid.candidate_count());

  // brute-force oracle over the same candidate streams
  double best = INFINITY;
  for (std::size_t ki = 0; ki < 2; ++ki)
    for (std::size_t bi = 0; bi < 3; ++bi)
      for (int draw = 0; draw < 3; ++draw) {
        RngStream stream = rng.substream({ki, bi, static_cast<std::uint64_t>(draw)});
        const auto est = fit_lsq(sample_basis(grid.hidden[ki], grid.radii[bi], 6, stream), train,
                                 data_truncation_level(train));
        best = std::min(best, empirical_risk(est, test));
      }
  EXPECT_EQ(sel.best.test_risk, best);
  EXPECT_EQ(empirical_risk(sel.best.estimator, test), best);
  EXPECT_EQ(select_lsq_model(train, test, grid, rng).best.detail, sel.best.detail);
}

TEST(SelectBaseline, OneCandidatePerWidth) {
  SimulationSpec s;
  s.target = 4;
  s.n = 60;
  const LabeledDataset data = generate_dataset(s, 0);
  AdamTrainOptions adam;
  adam.epochs = 20;
  const std::vector<Eigen::Index> widths = {4, 8, 16, 32, 64, 128};
  const RngStream rng(7);
  const Selection sel = select_baseline(data, BaselineArch::from_id("sig-net-3"), rng, widths, adam);
  EXPECT_EQ(sel.scored, 6u);
  EXPECT_EQ(sel.best.id, "sig-net-3");
  const auto [train, test] = split_sample(data);
  EXPECT_EQ(std::get<MlpParams>(sel.best.estimator.model).layers.size(), 3u);
  double best = INFINITY;
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    RngStream stream = rng.substream(wi);
    const auto est = train_adam(train, std::vector<Eigen::Index>(3, widths[wi]), Activation::sigmoid, adam, stream);
    best = std::min(best, empirical_risk(est, test));
  }
  EXPECT_EQ(sel.best.test_risk, best);
  EXPECT_EQ(select_baseline(data, BaselineArch::from_id("sig-net-3"), rng, widths, adam).best.detail, sel.best.detail);
}

TEST(BaselineArch, Ids) {
  for (const auto& id : baseline_ids()) EXPECT_EQ(BaselineArch::from_id(id).id(), id);
  EXPECT_THROW(BaselineArch::from_id("lsq-est"), DomainError);
  EXPECT_THROW(BaselineArch::from_id("relu-net-2"), DomainError);
}

TEST(Combine, Examples) {
  Candidate a{"a", {}, 0.5, ""}, b{"b", {}, 0.3, ""}, c{"c", {}, 0.3, ""};
  EXPECT_EQ(combine({&a, &b}, CombineMode::fresh).id, "b");
  EXPECT_EQ(combine({&a, &b, &c}, CombineMode::fresh).id, "b");
  EXPECT_EQ(combine({&c, &b}, CombineMode::fresh).id, "c");
  Candidate lsq{"lsq-est", {}, 0.1, ""};
  EXPECT_EQ(combine({&a, &b, &lsq}, CombineMode::classic).id, "b");
  EXPECT_EQ(combine({&a, &b, &lsq}, CombineMode::fresh).id, "lsq-est");
  EXPECT_LE(combine({&a, &b, &lsq}, CombineMode::fresh).test_risk, combine({&a, &b}, CombineMode::classic).test_risk);
  EXPECT_THROW(combine({}, CombineMode::fresh), EmptyCandidates);
  EXPECT_THROW(combine({&lsq}, CombineMode::classic), EmptyCandidates);
}

TEST(NormalizedError, ZeroPredictorScoresMeanSquare) {
  RngStream rng(8);
  TrainedEstimator zero;
  zero.model = RandomFeatureModel{sample_basis(1, 1.0, 6, rng), Vector::Zero(2)};
  RngStream a(9), b(9);
  const double err = normalized_error(zero, 4, 5000, 1.0, a);
  const Vector truth = eval_target_batch(4, sample_unit_cube(5000, 6, b));
  EXPECT_NEAR(err, truth.squaredNorm() / 5000, 1e-14);
  EXPECT_THROW(normalized_error(zero, 4, 5000, 0.0, a), DomainError);
}

TEST(NormalizedError, ExactTargetScoresZero) {
  // m4 is a tanh of a linear form, which a one-unit shallow net represents
  // through tanh(z) = 2 logistic(2z) - 1
  ShallowNetParams p(1, 6);
  p.alpha0 = -1.0;
  p.alpha[0] = 2.0;
  p.beta.row(0) << 0.4, 1.8, 2.0, 2.0, 0.4, 1.2;
  TrainedEstimator est;
  est.model = p;
  RngStream rng(10);
  EXPECT_LT(normalized_error(est, 4, 10000, 0.0049, rng), 1e-20);
}

TEST(NormalizedError, MeanPredictorScoresAboutOne) {
  SimulationSpec s;
  s.target = 2;
  s.n = 200;
  const double avg = avg_baseline_error(s, 50);
  std::vector<double> ratios;
  for (int rep = 0; rep < 10; ++rep) {
    const LabeledDataset data = generate_dataset(s, rep);
    TrainedEstimator constant;
    RngStream basis_rng(11);
    Vector alphas = Vector::Zero(2);
    alphas[0] = data.y.mean();
    constant.model = RandomFeatureModel{sample_basis(1, 1.0, 7, basis_rng), alphas};
    RngStream eval_rng(100 + static_cast<std::uint64_t>(rep));
    ratios.push_back(normalized_error(constant, 2, 10000, avg, eval_rng));
  }
  EXPECT_NEAR(median(ratios), 1.0, 0.1);
}

TEST(AvgBaseline, MatchesTargetVariance) {
  // the constant predictor's error is the variance of m(X) plus the
  // variance of the mean, which is small at n = 200
  SimulationSpec s;
  s.target = 4;
  RngStream rng(12);
  const Vector v = eval_target_batch(4, sample_unit_cube(200000, 6, rng));
  const double variance = (v.array() - v.mean()).square().mean();
  EXPECT_NEAR(avg_baseline_error(s, 50) / variance, 1.0, 0.1);
}

TEST(RunExperiment, SingleRepetitionHasZeroIqr) {
  SimulationSpec s = small_spec(4, {"lsq-est"});
  s.repetitions = 1;
  const BenchmarkReport report = run_experiment(s);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].iqr, 0.0);
  EXPECT_EQ(report.rows[0].median, report.rows[0].normalized_errors.at(0));
}

TEST(RunExperiment, RowsCoverRequestedIdsAndSupersetHolds) {
  const BenchmarkReport report = run_experiment(small_spec(2, all_estimator_ids()));
  ASSERT_EQ(report.rows.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(report.rows[i].id, all_estimator_ids()[i]);
    EXPECT_EQ(report.rows[i].normalized_errors.size(), 3u);
    EXPECT_GE(report.rows[i].iqr, 0.0);
    for (double e : report.rows[i].normalized_errors) EXPECT_GE(e, 0.0);
  }
  EXPECT_EQ(report.superset_violations, 0);
  EXPECT_EQ(report.failed_repetitions, 0);
  for (const auto& rep : report.repetitions)
    EXPECT_LE(rep.test_risk.at("comb-new"), std::min(rep.test_risk.at("comb-classic"), rep.test_risk.at("lsq-est")));
}

TEST(RunExperiment, ScheduleAndOrderIndependent) {
  SimulationSpec s = small_spec(4, {"relu-net-1", "lsq-est", "comb-new"});
  const BenchmarkReport serial = run_experiment(s);
  s.options.threads = 3;
  const BenchmarkReport threaded = run_experiment(s);
  s.estimator_ids = {"comb-new", "lsq-est", "relu-net-1"};
  const BenchmarkReport permuted = run_experiment(s);
  for (const auto& id : {"relu-net-1", "lsq-est", "comb-new"}) {
    EXPECT_EQ(serial.row(id).normalized_errors, threaded.row(id).normalized_errors) << id;
    EXPECT_EQ(serial.row(id).normalized_errors, permuted.row(id).normalized_errors) << id;
  }
}

TEST(RunExperiment, RejectsInvalidSpec) {
  SimulationSpec s = small_spec(4, {"lsq-est"});
  s.n = 9;
  EXPECT_THROW(run_experiment(s), DomainError);
  s = small_spec(4, {"tree"});
  EXPECT_THROW(run_experiment(s), DomainError);
  s = small_spec(4, {"lsq-est"});
  s.eval_N = 999;
  EXPECT_THROW(run_experiment(s), DomainError);
}
