#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "randnet/baseline_mlp.hpp"
#include "randnet/errors.hpp"
#include "randnet/estimator.hpp"
#include "randnet/numerics.hpp"
#include "randnet/rf_lsq.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

// ---------------------------------------------------------------------------
// Regression targets m1..m6 on [0,1]^d

/// Divisor inside m1's cosine product. `paper` uses sqrt(i - 1), which is
/// undefined for the first coordinate; `griewank` uses sqrt(i).
enum class M1Divisor { griewank, paper };

inline int target_dimension(int index) {
  switch (index) {
    case 1: case 2: case 3: case 6: return 7;
    case 4: return 6;
    case 5: return 10;
    default: throw DomainError("target index must be in 1..6, got " + std::to_string(index));
  }
}

/// Published noise scales, the IQR of m_i(X) for X uniform on [0,1]^d.
inline double published_lambda(int index) {
  static constexpr double values[] = {0.24, 0.11, 8.76, 0.04, 0.36, 9.11};
  target_dimension(index);
  return values[index - 1];
}

inline double eval_target(int index, const Eigen::Ref<const Vector>& x, M1Divisor divisor = M1Divisor::griewank) {
  if (x.size() != target_dimension(index)) throw DimensionMismatch("point dimension does not match target m" + std::to_string(index));
  switch (index) {
    case 1: {
      double prod = 1.0;
      for (Eigen::Index i = 0; i < 7; ++i) {
        const double scale = divisor == M1Divisor::griewank ? static_cast<double>(i + 1) : static_cast<double>(i);
        if (scale == 0.0) throw DomainError("m1 with divisor sqrt(i - 1) is undefined at i = 1");
        prod *= std::cos(x[i] / std::sqrt(scale));
      }
      return x.squaredNorm() / 4000.0 - prod;
    }
    case 2:
      return std::exp(0.5 * x.squaredNorm());
    case 3: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < 6; ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = x[i] - 1.0;
        sum += 10.0 * (a * a + b * b);
      }
      return sum;
    }
    case 4:
      return std::tanh(0.2 * x[0] + 0.9 * x[1] + x[2] + x[3] + 0.2 * x[4] + 0.6 * x[5]);
    case 5:
      return 1.0 / (1.0 + x.norm() / 4.0) + x[6] * x[6] + x[3] * x[4] * x[1];
    case 6: {
      const double inner = x[0] * x[0] + 2.0 * x[1] + std::sin(6.0 * x[3] * x[3] - 3.0);
      const double angle = std::numbers::pi / (1.0 + std::exp(inner));
      return 1.0 / std::tan(angle) + std::exp(3.0 * x[2] + 2.0 * x[3] - 5.0 * x[4] + std::sqrt(x[5] + 0.9 * x[6] + 0.1));
    }
    default:
      throw DomainError("target index must be in 1..6");
  }
}

inline Vector eval_target_batch(int index, const Eigen::Ref<const Matrix>& x, M1Divisor divisor = M1Divisor::griewank) {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = eval_target(index, x.row(i).transpose(), divisor);
  return out;
}

inline Matrix sample_unit_cube(Eigen::Index count, Eigen::Index d, RngStream& rng) {
  Matrix x(count, d);
  for (Eigen::Index i = 0; i < count; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.uniform01();
  return x;
}

// ---------------------------------------------------------------------------
// Order statistics

/// Sample quantile with linear interpolation between order statistics
/// (position q (n - 1) in the sorted sample).
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw TooSmall("quantile of an empty sample");
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double lower = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size()) return lower;
  const double upper = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return lower + frac * (upper - lower);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline double interquartile_range(const std::vector<double>& values) {
  return quantile(values, 0.75) - quantile(values, 0.25);
}

/// Median over `repetitions` of the IQR of m_i(X) on `draws` uniform points.
/// `scale` multiplies the target values.
inline double calibrate_lambda(int index, RngStream& rng, int repetitions = 100, Eigen::Index draws = 100000,
                               M1Divisor divisor = M1Divisor::griewank, double scale = 1.0) {
  const Eigen::Index d = target_dimension(index);
  std::vector<double> iqrs;
  std::vector<double> values(static_cast<std::size_t>(draws));
  Vector x(d);
  for (int r = 0; r < repetitions; ++r) {
    for (auto& v : values) {
      for (Eigen::Index j = 0; j < d; ++j) x[j] = rng.uniform01();
      v = scale * eval_target(index, x, divisor);
    }
    iqrs.push_back(interquartile_range(values));
  }
  return median(std::move(iqrs));
}

// ---------------------------------------------------------------------------
// Simulation configuration

enum class LambdaSource { published, calibrated };

struct LsqGrid {
  std::vector<Eigen::Index> hidden = {4, 8, 16, 32, 64, 128};
  std::vector<double> radii = default_radii();
  int draws = 10;

  /// {1, ..., 6} followed by the doublings 8, 16, ..., 131072.
  static std::vector<double> default_radii() {
    std::vector<double> r = {1, 2, 3, 4, 5, 6};
    for (double b = 8; b <= 131072; b *= 2) r.push_back(b);
    return r;
  }

  [[nodiscard]] std::size_t candidate_count() const { return hidden.size() * radii.size() * static_cast<std::size_t>(draws); }
};

struct BenchmarkOptions {
  M1Divisor m1_divisor = M1Divisor::griewank;
  LambdaSource lambda_source = LambdaSource::published;
  LsqGrid lsq_grid;
  double lsq_ridge_per_sample = 0.0;
  std::vector<Eigen::Index> widths = {4, 8, 16, 32, 64, 128};
  AdamTrainOptions adam;
  int avg_runs = 50;
  unsigned threads = 0;  // 0: hardware concurrency
};

inline const std::vector<std::string>& all_estimator_ids() {
  static const std::vector<std::string> ids = {"relu-net-1", "relu-net-3", "relu-net-6", "sig-net-1", "sig-net-3",
                                               "sig-net-6",  "comb-classic", "lsq-est",  "comb-new"};
  return ids;
}

inline const std::vector<std::string>& baseline_ids() {
  static const std::vector<std::string> ids(all_estimator_ids().begin(), all_estimator_ids().begin() + 6);
  return ids;
}

inline std::uint64_t estimator_code(const std::string& id) {
  const auto& ids = all_estimator_ids();
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw DomainError("unknown estimator id '" + id + "'");
  return static_cast<std::uint64_t>(it - ids.begin());
}

struct SimulationSpec {
  int target = 1;
  Eigen::Index n = 200;
  double noise_sigma = 0.05;
  std::vector<std::string> estimator_ids = all_estimator_ids();
  int repetitions = 10;
  Eigen::Index eval_N = 10000;
  std::uint64_t master_seed = 0;
  BenchmarkOptions options;

  void validate() const {
    target_dimension(target);
    if (n < 10) throw DomainError("n must be >= 10");
    if (repetitions < 1) throw DomainError("repetitions must be >= 1");
    if (eval_N < 1000) throw DomainError("eval_N must be >= 1000");
    if (!(noise_sigma >= 0.0)) throw DomainError("noise level must be nonnegative");
    for (const auto& id : estimator_ids) estimator_code(id);
  }
};

namespace stream_tag {
inline constexpr std::uint64_t data = 101;
inline constexpr std::uint64_t estimator = 102;
inline constexpr std::uint64_t evaluation = 103;
inline constexpr std::uint64_t baseline_avg = 104;
inline constexpr std::uint64_t calibration = 105;
}  // namespace stream_tag

/// Root stream of one (target, n, noise) cell.
inline RngStream cell_stream(const SimulationSpec& spec) {
  const auto noise_code = static_cast<std::uint64_t>(std::llround(spec.noise_sigma * 1e6));
  return RngStream(spec.master_seed).substream({static_cast<std::uint64_t>(spec.target),
                                                static_cast<std::uint64_t>(spec.n), noise_code});
}

inline double noise_lambda(const SimulationSpec& spec) {
  if (spec.options.lambda_source == LambdaSource::published) return published_lambda(spec.target);
  static std::mutex mutex;
  static std::map<std::pair<int, int>, double> cache;
  const std::lock_guard lock(mutex);
  const auto key = std::make_pair(spec.target, static_cast<int>(spec.options.m1_divisor));
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  // calibration is seed-independent so every run shares the same noise scale
  RngStream rng = RngStream(0).substream({stream_tag::calibration, static_cast<std::uint64_t>(spec.target)});
  const double lambda = calibrate_lambda(spec.target, rng, 100, 100000, spec.options.m1_divisor);
  cache.emplace(key, lambda);
  return lambda;
}

/// n observations Y = m_i(X) + sigma lambda_i eps with X uniform on [0,1]^d.
inline LabeledDataset generate_dataset(const SimulationSpec& spec, RngStream& rng) {
  const Eigen::Index d = target_dimension(spec.target);
  const double noise_scale = spec.noise_sigma * noise_lambda(spec);
  LabeledDataset data{sample_unit_cube(spec.n, d, rng), Vector(spec.n)};
  for (Eigen::Index i = 0; i < spec.n; ++i)
    data.y[i] = eval_target(spec.target, data.x.row(i).transpose(), spec.options.m1_divisor) + noise_scale * rng.normal();
  return data;
}

/// Dataset of repetition `rep`, drawn from its own stream.
inline LabeledDataset generate_dataset(const SimulationSpec& spec, int rep) {
  RngStream rng = cell_stream(spec).substream({stream_tag::data, static_cast<std::uint64_t>(rep)});
  return generate_dataset(spec, rng);
}

/// First ceil(4n/5) points for training, the rest for testing.
inline std::pair<LabeledDataset, LabeledDataset> split_sample(const LabeledDataset& data) {
  const Eigen::Index n = data.size();
  if (n < 5) throw TooSmall("sample splitting needs n >= 5");
  const Eigen::Index learn = (4 * n + 4) / 5;
  return {data.slice(0, learn), data.slice(learn, n - learn)};
}

// ---------------------------------------------------------------------------
// Model selection

struct Candidate {
  std::string id;
  TrainedEstimator estimator;
  double test_risk = std::numeric_limits<double>::infinity();
  std::string detail;
};

struct Selection {
  Candidate best;
  std::size_t scored = 0;
  std::vector<std::string> warnings;
};

/// Truncation level used for the least squares estimator in simulations:
/// the largest absolute training response.
inline double data_truncation_level(const LabeledDataset& train) {
  const double level = train.y.cwiseAbs().maxCoeff();
  return level > 0.0 ? level : 1.0;
}

/// Fits the random-feature least squares estimator for every (K, B, draw)
/// in the grid on the training split and keeps the one with the smallest
/// test-split risk. Ties go to the earliest candidate in (K, B, draw) order.
inline Selection select_lsq_model(const LabeledDataset& train, const LabeledDataset& test, const LsqGrid& grid,
                                  const RngStream& rng, double ridge_per_sample = 0.0) {
  Selection sel;
  sel.best.id = "lsq-est";
  const Eigen::Index d = train.dimension();
  const double level = data_truncation_level(train);
  const double ridge = ridge_per_sample * static_cast<double>(train.size());
  for (std::size_t ki = 0; ki < grid.hidden.size(); ++ki) {
    for (std::size_t bi = 0; bi < grid.radii.size(); ++bi) {
      for (int draw = 0; draw < grid.draws; ++draw) {
        RngStream stream = rng.substream({ki, bi, static_cast<std::uint64_t>(draw)});
        const auto k = grid.hidden[ki];
        const double b = grid.radii[bi];
        try {
          const RandomFeatureBasis basis = sample_basis(k, b, d, stream);
          TrainedEstimator est = fit_lsq(basis, train, level, ridge);
          const double risk = empirical_risk(est, test);
          ++sel.scored;
          if (risk < sel.best.test_risk) {
            sel.best.estimator = std::move(est);
            sel.best.test_risk = risk;
            sel.best.detail = "K=" + std::to_string(k) + " B=" + std::to_string(static_cast<long long>(b)) +
                              " draw=" + std::to_string(draw);
          }
        } catch (const SolveFailure& e) {
          sel.warnings.push_back("lsq candidate K=" + std::to_string(k) + " B=" + std::to_string(b) + " skipped: " + e.what());
        }
      }
    }
  }
  if (sel.scored == 0) throw SolveFailure("every least squares candidate failed");
  return sel;
}

inline Selection select_lsq_model(const LabeledDataset& data, const RngStream& rng, const LsqGrid& grid = {}) {
  const auto [train, test] = split_sample(data);
  return select_lsq_model(train, test, grid, rng);
}

struct BaselineArch {
  int hidden_layers = 1;
  Activation activation = Activation::relu;

  static BaselineArch from_id(const std::string& id) {
    BaselineArch a;
    if (id.rfind("relu-net-", 0) == 0) a.activation = Activation::relu;
    else if (id.rfind("sig-net-", 0) == 0) a.activation = Activation::sigmoid;
    else throw DomainError("not a baseline id: '" + id + "'");
    a.hidden_layers = std::stoi(id.substr(id.rfind('-') + 1));
    if (a.hidden_layers != 1 && a.hidden_layers != 3 && a.hidden_layers != 6)
      throw DomainError("baseline depth must be 1, 3 or 6");
    return a;
  }

  [[nodiscard]] std::string id() const {
    return std::string(activation == Activation::relu ? "relu" : "sig") + "-net-" + std::to_string(hidden_layers);
  }
};

/// One adam run per candidate width (every hidden layer shares the width);
/// the width with the smallest test-split risk wins, earliest on ties.
inline Selection select_baseline(const LabeledDataset& train, const LabeledDataset& test, const BaselineArch& arch,
                                 const std::vector<Eigen::Index>& widths, const AdamTrainOptions& adam,
                                 const RngStream& rng) {
  Selection sel;
  sel.best.id = arch.id();
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    RngStream stream = rng.substream(wi);
    const std::vector<Eigen::Index> shape(static_cast<std::size_t>(arch.hidden_layers), widths[wi]);
    try {
      TrainedEstimator est = train_adam(train, shape, arch.activation, adam, stream);
      const double risk = empirical_risk(est, test);
      if (!std::isfinite(risk)) throw NonFiniteLoss("test risk is not finite");
      ++sel.scored;
      if (risk < sel.best.test_risk) {
        sel.best.estimator = std::move(est);
        sel.best.test_risk = risk;
        sel.best.detail = "width=" + std::to_string(widths[wi]);
      }
    } catch (const NonFiniteLoss& e) {
      sel.warnings.push_back(arch.id() + " width " + std::to_string(widths[wi]) + " skipped: " + e.what());
    }
  }
  if (sel.scored == 0) throw NonFiniteLoss("every " + arch.id() + " candidate diverged");
  return sel;
}

inline Selection select_baseline(const LabeledDataset& data, const BaselineArch& arch, const RngStream& rng,
                                 const std::vector<Eigen::Index>& widths = {4, 8, 16, 32, 64, 128},
                                 const AdamTrainOptions& adam = {}) {
  const auto [train, test] = split_sample(data);
  return select_baseline(train, test, arch, widths, adam, rng);
}

enum class CombineMode { classic, fresh };

/// Candidate with the smallest test risk, earliest in list order on ties.
/// Classic mode ignores the least squares estimator.
inline const Candidate& combine(const std::vector<const Candidate*>& candidates, CombineMode mode) {
  const Candidate* best = nullptr;
  for (const Candidate* c : candidates) {
    if (mode == CombineMode::classic && c->id == "lsq-est") continue;
    if (!best || c->test_risk < best->test_risk) best = c;
  }
  if (!best) throw EmptyCandidates("no candidates to combine");
  return *best;
}

// ---------------------------------------------------------------------------
// Error evaluation

/// Mean squared deviation from the target over eval_N fresh uniform points,
/// divided by `avg_baseline`.
inline double normalized_error(const TrainedEstimator& est, int target, Eigen::Index eval_N, double avg_baseline,
                               RngStream& rng, M1Divisor divisor = M1Divisor::griewank) {
  if (!(avg_baseline > 0.0)) throw DomainError("normalizer must be positive");
  const Matrix x = sample_unit_cube(eval_N, target_dimension(target), rng);
  const Vector truth = eval_target_batch(target, x, divisor);
  return (est.predict_batch(x) - truth).squaredNorm() / static_cast<double>(eval_N) / avg_baseline;
}

/// Median over `runs` fresh samples of size n of the L2 error of the
/// constant predictor equal to the sample mean of the responses.
inline double avg_baseline_error(const SimulationSpec& spec, int runs) {
  const RngStream root = cell_stream(spec).substream(stream_tag::baseline_avg);
  const Eigen::Index d = target_dimension(spec.target);
  std::vector<double> errors;
  for (int r = 0; r < runs; ++r) {
    RngStream data_rng = root.substream({0, static_cast<std::uint64_t>(r)});
    RngStream eval_rng = root.substream({1, static_cast<std::uint64_t>(r)});
    const double mean = generate_dataset(spec, data_rng).y.mean();
    const Vector truth = eval_target_batch(spec.target, sample_unit_cube(spec.eval_N, d, eval_rng), spec.options.m1_divisor);
    errors.push_back((truth.array() - mean).square().mean());
  }
  return median(std::move(errors));
}

// ---------------------------------------------------------------------------
// Full experiment

struct EstimatorSummary {
  std::string id;
  double median = std::numeric_limits<double>::quiet_NaN();
  double iqr = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> normalized_errors;  // one per successful repetition
  std::vector<double> test_risks;
  std::vector<std::string> selections;
};

struct RepetitionOutcome {
  bool ok = false;
  std::string error;
  std::map<std::string, double> normalized;
  std::map<std::string, double> test_risk;
  std::map<std::string, std::string> selection;
  std::vector<std::string> warnings;
};

struct BenchmarkReport {
  SimulationSpec spec;
  double avg_baseline = 0.0;
  std::vector<EstimatorSummary> rows;
  std::vector<RepetitionOutcome> repetitions;
  // repetitions where comb-new's test risk exceeded min(comb-classic, lsq-est)
  int superset_violations = 0;
  int failed_repetitions = 0;
  std::vector<std::string> warnings;

  [[nodiscard]] const EstimatorSummary& row(const std::string& id) const {
    for (const auto& r : rows)
      if (r.id == id) return r;
    throw DomainError("report has no row for '" + id + "'");
  }
};

namespace detail {

inline bool wants(const std::vector<std::string>& ids, const std::string& id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

inline RepetitionOutcome run_repetition(const SimulationSpec& spec, int rep, double avg_baseline) {
  RepetitionOutcome out;
  const auto& ids = spec.estimator_ids;
  const bool need_classic = wants(ids, "comb-classic") || wants(ids, "comb-new");
  const bool need_lsq = wants(ids, "lsq-est") || wants(ids, "comb-new");

  const RngStream cell = cell_stream(spec);
  const auto rep_id = static_cast<std::uint64_t>(rep);
  const LabeledDataset data = generate_dataset(spec, rep);
  const auto [train, test] = split_sample(data);

  std::map<std::string, Candidate> fitted;
  for (const auto& id : baseline_ids()) {
    if (!need_classic && !wants(ids, id)) continue;
    const RngStream rng = cell.substream({stream_tag::estimator, estimator_code(id), rep_id});
    try {
      Selection sel = select_baseline(train, test, BaselineArch::from_id(id), spec.options.widths, spec.options.adam, rng);
      out.warnings.insert(out.warnings.end(), sel.warnings.begin(), sel.warnings.end());
      fitted.emplace(id, std::move(sel.best));
    } catch (const NonFiniteLoss& e) {
      out.warnings.push_back(e.what());
    }
  }
  if (need_lsq) {
    const RngStream rng = cell.substream({stream_tag::estimator, estimator_code("lsq-est"), rep_id});
    Selection sel = select_lsq_model(train, test, spec.options.lsq_grid, rng, spec.options.lsq_ridge_per_sample);
    out.warnings.insert(out.warnings.end(), sel.warnings.begin(), sel.warnings.end());
    fitted.emplace("lsq-est", std::move(sel.best));
  }

  std::vector<const Candidate*> pool;
  for (const auto& id : baseline_ids())
    if (auto it = fitted.find(id); it != fitted.end()) pool.push_back(&it->second);
  std::map<std::string, const Candidate*> chosen;
  for (const auto& [id, c] : fitted) chosen[id] = &c;
  if (need_classic) chosen["comb-classic"] = &combine(pool, CombineMode::classic);
  if (wants(ids, "comb-new")) {
    pool.push_back(&fitted.at("lsq-est"));
    chosen["comb-new"] = &combine(pool, CombineMode::fresh);
  }

  for (const auto& id : ids) {
    const auto it = chosen.find(id);
    if (it == chosen.end()) continue;
    RngStream eval_rng = cell.substream({stream_tag::evaluation, rep_id});
    out.normalized[id] = normalized_error(it->second->estimator, spec.target, spec.eval_N, avg_baseline, eval_rng,
                                          spec.options.m1_divisor);
    out.test_risk[id] = it->second->test_risk;
    out.selection[id] = it->second->id + (it->second->detail.empty() ? "" : " " + it->second->detail);
  }
  // test risks of the combined estimators, kept even when not reported
  if (need_classic) out.test_risk.try_emplace("comb-classic", chosen["comb-classic"]->test_risk);
  if (need_lsq) out.test_risk.try_emplace("lsq-est", fitted.at("lsq-est").test_risk);
  out.ok = true;
  return out;
}

template <typename Fn>
void parallel_for(int count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
}

}  // namespace detail

/// Runs every repetition of one simulation cell and aggregates the median
/// and IQR of each estimator's normalized error. Each repetition and
/// candidate draws from its own stream, so the result does not depend on
/// the thread schedule.
inline BenchmarkReport run_experiment(const SimulationSpec& spec) {
  spec.validate();
  BenchmarkReport report;
  report.spec = spec;
  report.avg_baseline = avg_baseline_error(spec, spec.options.avg_runs);
  if (!(report.avg_baseline > 0.0)) throw DomainError("constant-predictor error is zero; cannot normalize");

  report.repetitions.resize(static_cast<std::size_t>(spec.repetitions));
  detail::parallel_for(spec.repetitions, spec.options.threads, [&](int rep) {
    auto& slot = report.repetitions[static_cast<std::size_t>(rep)];
    try {
      slot = detail::run_repetition(spec, rep, report.avg_baseline);
    } catch (const Error& e) {
      slot.ok = false;
      slot.error = e.what();
    }
  });

  for (const auto& id : spec.estimator_ids) {
    EstimatorSummary row;
    row.id = id;
    report.rows.push_back(std::move(row));
  }
  for (std::size_t r = 0; r < report.repetitions.size(); ++r) {
    const auto& rep = report.repetitions[r];
    for (const auto& w : rep.warnings) report.warnings.push_back("rep " + std::to_string(r) + ": " + w);
    if (!rep.ok) {
      ++report.failed_repetitions;
      report.warnings.push_back("rep " + std::to_string(r) + " failed: " + rep.error);
      continue;
    }
    for (auto& row : report.rows) {
      if (auto it = rep.normalized.find(row.id); it != rep.normalized.end()) {
        row.normalized_errors.push_back(it->second);
        row.test_risks.push_back(rep.test_risk.at(row.id));
        row.selections.push_back(rep.selection.at(row.id));
      }
    }
    if (auto it = rep.test_risk.find("comb-new"); it != rep.test_risk.end()) {
      const double bound = std::min(rep.test_risk.at("comb-classic"), rep.test_risk.at("lsq-est"));
      if (!(it->second <= bound)) ++report.superset_violations;
    }
  }
  if (report.failed_repetitions == spec.repetitions) throw Error("all repetitions failed: " + report.repetitions.front().error);
  for (auto& row : report.rows) {
    if (row.normalized_errors.empty()) continue;
    row.median = median(row.normalized_errors);
    row.iqr = interquartile_range(row.normalized_errors);
  }
  return report;
}

}  // namespace randnet
