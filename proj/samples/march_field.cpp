// March one realization of the nonlinear field and its linear companion on the
// unit window, then print a few values and the theta estimate.
//
//   sample_march_field [n] [seed] [out.csv]

#include <cstdint>
#include <cstdlib>
#include <iostream>

#include "kgqv/analysis.hpp"
#include "kgqv/solver.hpp"

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 128;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  kgqv::PhysParams p;  // a = 1, m = 0.5, theta = 1, F = 2 + sin
  p.theta = 2.0;
  const auto F = kgqv::DiffusionCoefficient::shifted_sine();
  const auto noise = kgqv::generate(kgqv::RotatedGrid::unit_window(n), seed);
  const kgqv::FieldSample v = kgqv::march(p, F, noise);
  const kgqv::FieldSample V = kgqv::march_linear(p, noise);

  for (double q : {0.25, 0.5, 0.75, 1.0}) {
    const kgqv::RotPoint r{q, q};
    std::cout << "v(" << q << "," << q << ") = " << v.value_at(r) << "   V = " << V.value_at(r) << "\n";
  }
  std::cout << "Q_N(v) = " << kgqv::quad_var(v) << ", limit = " << p.theta * p.theta * kgqv::limit_functional(v, F)
            << ", theta_hat = " << kgqv::estimate_theta(v, F) << " (true " << p.theta << ")\n";

  if (argc > 3) {
    v.write_csv(argv[3]);
    std::cout << "wrote " << argv[3] << "\n";
  }
}
