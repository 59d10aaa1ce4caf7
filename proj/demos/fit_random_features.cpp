// Fits the plain and projected random-feature estimators to noisy samples
// of m4 and reports their L2 errors on fresh points.
#include <cstdio>

#include "randnet/benchmark.hpp"
#include "randnet/rf_lsq.hpp"

int main() {
  using namespace randnet;
  SimulationSpec spec;
  spec.target = 4;
  spec.n = 400;
  spec.noise_sigma = 0.05;
  const LabeledDataset data = generate_dataset(spec, 0);

  RngStream rng(7);
  const double level = data_truncation_level(data);
  const auto plain = fit_lsq(sample_basis(64, 8.0, data.dimension(), rng), data, level);
  const auto projected = fit_lsq(sample_projected_basis(64, 8.0, data.dimension(), rng), data, level);

  RngStream eval_rng(8);
  const Matrix x = sample_unit_cube(10000, data.dimension(), eval_rng);
  const Vector truth = eval_target_batch(4, x);
  for (const auto* est : {&plain, &projected}) {
    const double mse = (est->predict_batch(x) - truth).squaredNorm() / static_cast<double>(x.rows());
    std::printf("%-10s L2 error %.4g\n", est == &plain ? "plain" : "projected", mse);
  }
}
