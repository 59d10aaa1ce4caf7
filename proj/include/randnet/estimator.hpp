#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "randnet/errors.hpp"
#include "randnet/mlp.hpp"
#include "randnet/numerics.hpp"
#include "randnet/random_features.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

/// A fitted regression function with its truncation level. Baselines carry
/// `kNoTruncation`, which makes truncation a no-op.
struct TrainedEstimator {
  std::variant<ShallowNetParams, RandomFeatureModel, MlpParams> model;
  double truncation = kNoTruncation;
  std::vector<double> trace;

  [[nodiscard]] Eigen::Index dimension() const {
    return std::visit(
        [](const auto& m) -> Eigen::Index {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ShallowNetParams>) return m.dimension();
          else if constexpr (std::is_same_v<M, RandomFeatureModel>) return m.basis.dimension();
          else return m.input_dimension();
        },
        model);
  }

  /// Untruncated outputs on every row of x.
  [[nodiscard]] Vector raw_batch(const Eigen::Ref<const Matrix>& x) const {
    return std::visit(
        [&](const auto& m) -> Vector {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ShallowNetParams>) return forward_batch(m, x);
          else if constexpr (std::is_same_v<M, RandomFeatureModel>) return m.evaluate(x);
          else return mlp_forward_batch(m, x);
        },
        model);
  }

  [[nodiscard]] Vector predict_batch(const Eigen::Ref<const Matrix>& x) const {
    if (x.cols() != dimension()) throw DimensionMismatch("input dimension does not match estimator");
    Vector out = raw_batch(x);
    const double level = truncation;
    if (std::isfinite(level)) out = out.unaryExpr([level](double v) { return randnet::truncate(level, v); });
    return out;
  }
};

inline double predict(const TrainedEstimator& est, const Eigen::Ref<const Vector>& x) {
  return est.predict_batch(x.transpose())[0];
}

/// Mean squared residual of the estimator's predictions on a dataset.
inline double empirical_risk(const TrainedEstimator& est, const LabeledDataset& data) {
  return (est.predict_batch(data.x) - data.y).squaredNorm() / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// JSON persistence
//
// Every document carries "kind" and "beta_n" (null when untruncated).
//   shallow / plain / projected: "B_n", "betas" (K rows of d), "gammas",
//                                "alphas" (alpha0 first)
//   mlp: "activation", "layers" [{"weight", "bias"}], "output" {"weight", "bias"}

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : cols_if_empty;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols) throw DimensionMismatch("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedEstimator& est) {
  nlohmann::json doc;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ShallowNetParams>) {
          doc["kind"] = "shallow";
          doc["B_n"] = m.beta.rows() > 0 ? m.beta.row(0).norm() : 0.0;
          doc["betas"] = detail::matrix_to_json(m.beta);
          doc["gammas"] = detail::vector_to_json(m.gamma);
          Vector alphas(m.hidden() + 1);
          alphas << m.alpha0, m.alpha;
          doc["alphas"] = detail::vector_to_json(alphas);
        } else if constexpr (std::is_same_v<M, RandomFeatureModel>) {
          doc["kind"] = std::string(to_string(m.basis.kind));
          doc["B_n"] = m.basis.scale;
          doc["betas"] = detail::matrix_to_json(m.basis.betas);
          doc["gammas"] = detail::vector_to_json(m.basis.gammas);
          doc["alphas"] = detail::vector_to_json(m.alphas);
        } else {
          doc["kind"] = "mlp";
          doc["activation"] = std::string(to_string(m.activation));
          auto layers = nlohmann::json::array();
          for (const auto& l : m.layers)
            layers.push_back({{"weight", detail::matrix_to_json(l.weight)}, {"bias", detail::vector_to_json(l.bias)}});
          doc["layers"] = std::move(layers);
          doc["output"] = {{"weight", detail::vector_to_json(m.out_weight)}, {"bias", m.out_bias}};
        }
      },
      est.model);
  doc["beta_n"] = std::isfinite(est.truncation) ? nlohmann::json(est.truncation) : nlohmann::json(nullptr);
  return doc;
}

inline TrainedEstimator estimator_from_json(const nlohmann::json& doc) {
  TrainedEstimator est;
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "shallow") {
    ShallowNetParams p;
    p.beta = detail::matrix_from_json(doc.at("betas"));
    p.gamma = detail::vector_from_json(doc.at("gammas"));
    const Vector alphas = detail::vector_from_json(doc.at("alphas"));
    if (alphas.size() != p.gamma.size() + 1) throw DimensionMismatch("alphas must have K + 1 entries");
    p.alpha0 = alphas[0];
    p.alpha = alphas.tail(p.gamma.size());
    p.validate();
    est.model = std::move(p);
  } else if (kind == "plain" || kind == "projected") {
    RandomFeatureModel m;
    m.basis.kind = kind == "plain" ? BasisKind::plain : BasisKind::projected;
    m.basis.scale = doc.at("B_n").get<double>();
    m.basis.betas = detail::matrix_from_json(doc.at("betas"));
    m.basis.gammas = detail::vector_from_json(doc.at("gammas"));
    m.alphas = detail::vector_from_json(doc.at("alphas"));
    if (m.basis.betas.rows() != m.basis.gammas.size() || m.alphas.size() != m.basis.size() + 1)
      throw DimensionMismatch("inconsistent random-feature model sizes");
    est.model = std::move(m);
  } else if (kind == "mlp") {
    MlpParams m;
    const auto act = doc.at("activation").get<std::string>();
    if (act != "relu" && act != "sigmoid") throw DomainError("unknown activation '" + act + "'");
    m.activation = act == "relu" ? Activation::relu : Activation::sigmoid;
    for (const auto& l : doc.at("layers"))
      m.layers.push_back({detail::matrix_from_json(l.at("weight")), detail::vector_from_json(l.at("bias"))});
    m.out_weight = detail::vector_from_json(doc.at("output").at("weight"));
    m.out_bias = doc.at("output").at("bias").get<double>();
    m.validate();
    est.model = std::move(m);
  } else {
    throw DomainError("unknown estimator kind '" + kind + "'");
  }
  const auto& level = doc.at("beta_n");
  est.truncation = level.is_null() ? kNoTruncation : level.get<double>();
  return est;
}

}  // namespace randnet
