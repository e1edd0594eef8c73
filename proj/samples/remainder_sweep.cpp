// Small remainder-rate sweep at (0.5, 0.5): ||R_eps^+||_2 for dyadic eps, and
// the fitted log-log slope.
//
//   sample_remainder_sweep [reps]

#include <cstdlib>
#include <iostream>
#include <vector>

#include "kgqv/analysis.hpp"
#include "kgqv/solver.hpp"

int main(int argc, char** argv) {
  const std::size_t reps = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200;
  const int n = 256;
  const std::vector<double> eps{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const kgqv::RotPoint q{0.5, 0.5};
  const kgqv::PhysParams p;
  const auto F = kgqv::DiffusionCoefficient::shifted_sine();
  const kgqv::RotatedGrid grid = kgqv::RotatedGrid::covering(n, q.tau + eps.front(), q.lambda + eps.front());

  std::vector<std::vector<double>> samples(eps.size(), std::vector<double>(reps));
  auto noise = kgqv::NoiseField::zeros(grid);
  for (std::size_t r = 0; r < reps; ++r) {
    noise.regenerate(1000 + r);
    const auto v = kgqv::march(p, F, noise);
    const auto V = kgqv::march_linear(p, noise);
    for (std::size_t e = 0; e < eps.size(); ++e)
      samples[e][r] = kgqv::remainder(v, V, F, q, eps[e], kgqv::Sign::plus);
  }

  std::vector<double> norms;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const auto est = kgqv::lp_norm(samples[e], 2.0);
    norms.push_back(est.estimate);
    std::cout << "eps = " << eps[e] << "  ||R||_2 = " << est.estimate << " +- " << est.se << "\n";
  }
  const auto fit = kgqv::loglog_fit(eps, norms);
  std::cout << "slope " << fit.slope << " +- " << fit.slope_se << " (theory 1.5)\n";
}
