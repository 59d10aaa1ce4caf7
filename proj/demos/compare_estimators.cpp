// One small simulation cell: three repetitions of every estimator on m2.
#include <iostream>

#include "randnet/benchmark.hpp"
#include "randnet/report.hpp"

int main() {
  randnet::SimulationSpec spec;
  spec.target = 2;
  spec.n = 200;
  spec.noise_sigma = 0.05;
  spec.repetitions = 3;
  spec.eval_N = 10000;
  spec.estimator_ids = {"sig-net-1", "relu-net-1", "lsq-est", "comb-classic", "comb-new"};
  const auto report = randnet::run_experiment(spec);
  std::cout << randnet::simulate_csv(report);
}
