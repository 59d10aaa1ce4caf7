#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "randnet/errors.hpp"

namespace randnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b * 0xd1b54a32d192ed03ULL);
  splitmix64(s);
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Splittable pseudo-random stream keyed by (seed, stream_id).
///
/// The key is hashed through splitmix64 into a xoshiro256** state, so two
/// streams with the same key produce the same sequence no matter which
/// thread or in which order they are consumed. Child streams are derived
/// with `substream`, which hashes the child id into the parent's stream id.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t s = detail::mix(seed, stream_id);
    for (auto& word : state_) word = detail::splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  [[nodiscard]] RngStream substream(std::uint64_t id) const {
    return RngStream(seed_, detail::mix(stream_id_, id));
  }

  [[nodiscard]] RngStream substream(std::initializer_list<std::uint64_t> path) const {
    std::uint64_t key = stream_id_;
    for (auto id : path) key = detail::mix(key, id);
    return RngStream(seed_, key);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

/// Minimizer of |Ax - b|^2 + ridge |x|^2.
///
/// Uses a complete orthogonal decomposition (column-pivoted QR followed by
/// an RQ step on the trailing block), which returns the minimum-norm
/// solution when A is rank deficient and ridge is zero. A positive ridge
/// is folded in by stacking sqrt(ridge) * I under A.
inline Vector solve_least_squares(const Eigen::Ref<const Matrix>& a,
                                  const Eigen::Ref<const Vector>& b,
                                  double ridge = 0.0) {
  if (a.rows() < 1 || a.cols() < 1) throw DimensionMismatch("empty design matrix");
  if (b.size() != a.rows()) throw DimensionMismatch("right-hand side length differs from row count");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw DomainError("ridge must be finite and nonnegative");
  if (!a.allFinite() || !b.allFinite()) throw NonFiniteInput("least squares input contains NaN or Inf");

  Vector x;
  if (ridge > 0.0) {
    const Eigen::Index n = a.rows();
    const Eigen::Index p = a.cols();
    Matrix stacked(n + p, p);
    stacked.topRows(n) = a;
    stacked.bottomRows(p) = std::sqrt(ridge) * Matrix::Identity(p, p);
    Vector rhs = Vector::Zero(n + p);
    rhs.head(n) = b;
    x = stacked.completeOrthogonalDecomposition().solve(rhs);
  } else {
    x = a.completeOrthogonalDecomposition().solve(b);
  }
  if (!x.allFinite()) throw SolveFailure("factorization produced non-finite coefficients");
  return x;
}

/// Point uniform on the sphere of the given radius: a standard Gaussian
/// vector normalized to unit length, then scaled.
inline Vector sample_uniform_sphere(Eigen::Index d, double radius, RngStream& rng) {
  if (d < 1) throw DomainError("sphere dimension must be >= 1");
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  Vector v(d);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
    norm = v.norm();
  } while (!(norm > 0.0));
  return (v / norm) * radius;
}

inline double sample_uniform_interval(double lo, double hi, RngStream& rng) {
  if (lo > hi) throw DomainError("interval with lo > hi");
  const double value = lo + (hi - lo) * rng.uniform01();
  return value > hi ? hi : value;
}

/// Closed-form pieces of the radially symmetric density
///
///   f(w) = 4^-(d+1) 1{|w| <= 2} + c20 / (|w|^d log^2 |w|) 1{|w| > 2}.
///
/// Inner mass: vol(B_2) / 4^(d+1) with vol(B_r) = pi^(d/2) r^d / Gamma(d/2 + 1).
/// Outer mass in polar coordinates: c20 * S_(d-1) * int_2^inf dr / (r log^2 r)
/// = c20 * S_(d-1) / log 2, with S_(d-1) = 2 pi^(d/2) / Gamma(d/2) the area of
/// the unit sphere. Normalization fixes c20 = (1 - inner mass) log 2 / S_(d-1).
struct ProjectedDensity {
  int dimension = 1;
  double inner_mass = 0.0;
  double c20 = 0.0;

  explicit ProjectedDensity(int d) : dimension(d) {
    if (d < 1) throw DomainError("density dimension must be >= 1");
    const double half_d = 0.5 * d;
    const double log_ball = half_d * std::log(std::numbers::pi) + d * std::log(2.0) -
                            std::lgamma(half_d + 1.0);
    inner_mass = std::exp(log_ball - (d + 1) * std::log(4.0));
    const double sphere_area =
        2.0 * std::exp(half_d * std::log(std::numbers::pi) - std::lgamma(half_d));
    c20 = (1.0 - inner_mass) * std::numbers::ln2 / sphere_area;
  }

  /// Tail of the radius conditional on falling outside the radius-2 ball.
  static double outer_survival(double r) { return r <= 2.0 ? 1.0 : std::numbers::ln2 / std::log(r); }
};

// Outer radii above this are redrawn so that coordinates and inner products
// with points of [0,1]^d stay finite. The discarded tail carries
// ln 2 / ln(1e300), about 0.1% of the outer mass.
inline constexpr double kProjectedRadiusCap = 1e300;

/// Draw from the density described by `ProjectedDensity`: a uniform
/// direction times a radius from the two-component radial mixture.
inline Vector sample_projected_direction(Eigen::Index d, RngStream& rng) {
  const ProjectedDensity density(static_cast<int>(d));
  double radius = 0.0;
  if (rng.uniform01() < density.inner_mass) {
    // radial law of the uniform ball: P(R <= r) = (r/2)^d
    radius = 2.0 * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
  } else {
    do {
      radius = std::exp(std::numbers::ln2 / (1.0 - rng.uniform01()));
    } while (!(radius <= kProjectedRadiusCap));
  }
  if (radius == 0.0) return Vector::Zero(d);
  return sample_uniform_sphere(d, radius, rng);
}

/// Central-difference gradient of a scalar field.
template <typename Field>
Vector finite_difference_gradient(Field&& f, const Eigen::Ref<const Vector>& x, double h) {
  if (!(h > 0.0)) throw DomainError("finite difference step must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double up = f(probe);
    probe[i] = xi - h;
    const double down = f(probe);
    probe[i] = xi;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NonFiniteValue("field returned NaN/Inf at a probe point");
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace randnet
