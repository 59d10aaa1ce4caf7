#pragma once

#include <algorithm>
#include <vector>

#include "randnet/mlp.hpp"
#include "randnet/numerics.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet::testing {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline Vector gaussian_vector(Eigen::Index size, RngStream& rng, double scale = 1.0) {
  return gaussian_matrix(size, 1, rng, scale);
}

inline LabeledDataset uniform_dataset(Eigen::Index n, Eigen::Index d, RngStream& rng) {
  LabeledDataset data{Matrix(n, d), Vector(n)};
  for (Eigen::Index i = 0; i < data.x.size(); ++i) data.x.data()[i] = rng.uniform01();
  for (Eigen::Index i = 0; i < n; ++i) data.y[i] = rng.normal();
  return data;
}

inline ShallowNetParams random_net(Eigen::Index k, Eigen::Index d, RngStream& rng, double scale = 1.0) {
  ShallowNetParams p(k, d);
  p.alpha0 = scale * rng.normal();
  p.alpha = gaussian_vector(k, rng, scale);
  p.beta = gaussian_matrix(k, d, rng, scale);
  p.gamma = gaussian_vector(k, rng, scale);
  return p;
}

inline Vector flatten(MlpParams p) {
  std::vector<double> out;
  zip_blocks([&](auto block) { out.insert(out.end(), block.data(), block.data() + block.size()); }, p);
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline MlpParams unflatten(const MlpParams& like, const Vector& w) {
  MlpParams p = like;
  Eigen::Index at = 0;
  zip_blocks(
      [&](auto block) {
        block = w.segment(at, block.size());
        at += block.size();
      },
      p);
  return p;
}

inline double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

}  // namespace randnet::testing
