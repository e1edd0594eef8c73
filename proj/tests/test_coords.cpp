#include <gtest/gtest.h>

#include <cmath>

#include "kgqv/coords.hpp"

using namespace kgqv;

TEST(Rotation, KnownPoints) {
  const RotPoint a = to_rotated(PhysPoint{kSqrt2, 0.0});
  EXPECT_NEAR(a.tau, 1.0, 1e-15);
  EXPECT_NEAR(a.lambda, 1.0, 1e-15);

  const RotPoint o = to_rotated(PhysPoint{0.0, 0.0});
  EXPECT_EQ(o.tau, 0.0);
  EXPECT_EQ(o.lambda, 0.0);

  const RotPoint c = to_rotated(PhysPoint{1.0, 1.0});
  EXPECT_NEAR(c.tau, 0.0, 1e-15);
  EXPECT_NEAR(c.lambda, kSqrt2, 1e-15);

  const PhysPoint p = to_physical(RotPoint{1.0, 1.0});
  EXPECT_NEAR(p.t, kSqrt2, 1e-15);
  EXPECT_NEAR(p.x, 0.0, 1e-15);
  const PhysPoint z = to_physical(RotPoint{0.0, 0.0});
  EXPECT_EQ(z.t, 0.0);
  EXPECT_EQ(z.x, 0.0);
}

TEST(Rotation, RoundTripAndIsometry) {
  const PhysPoint p{0.3, -0.7};
  const PhysPoint back = to_physical(to_rotated(p));
  EXPECT_NEAR(back.t, p.t, 1e-14);
  EXPECT_NEAR(back.x, p.x, 1e-14);

  for (int k = 0; k < 200; ++k) {
    const PhysPoint q{0.01 * k, std::sin(0.37 * k) * 3.0};
    const RotPoint r = to_rotated(q);
    EXPECT_NEAR(q.t * q.t + q.x * q.x, r.tau * r.tau + r.lambda * r.lambda, 1e-13);
    const PhysPoint b = to_physical(r);
    EXPECT_NEAR(b.t, q.t, 1e-14);
    EXPECT_NEAR(b.x, q.x, 1e-14);
  }
}

TEST(Grid, UnitWindowBounds) {
  const RotatedGrid g = RotatedGrid::unit_window(8);
  EXPECT_EQ(g.n(), 8);
  EXPECT_EQ(g.eps() * g.n(), 1.0);
  EXPECT_EQ(g.i_min(), -8);
  EXPECT_EQ(g.j_min(), -8);
  EXPECT_EQ(g.i_max(), 8);
  EXPECT_TRUE(g.contains(-8, 8));
  EXPECT_TRUE(g.contains(8, -8));
  EXPECT_FALSE(g.contains(-1, 0));
  EXPECT_FALSE(g.contains(9, 0));
  EXPECT_TRUE(g.contains_cell(0, 0));
  EXPECT_FALSE(g.contains_cell(8, 0));  // top vertex outside
  EXPECT_FALSE(g.contains_cell(-3, 2));
}

TEST(Grid, CoveringWindow) {
  const RotatedGrid g = RotatedGrid::covering(16, 0.5625, 0.25);
  EXPECT_EQ(g.i_max(), 9);
  EXPECT_EQ(g.j_max(), 4);
  const RotatedGrid h = RotatedGrid::covering(16, 0.51, 0.0);
  EXPECT_EQ(h.i_max(), 9);  // rounds up off the lattice
  EXPECT_EQ(h.j_max(), 0);
}

TEST(Grid, StepsAndIndexRejectOffLattice) {
  const RotatedGrid g = RotatedGrid::unit_window(64);
  EXPECT_EQ(g.steps(1.0 / 16), 4);
  EXPECT_THROW(g.steps(1.0 / 100), DomainError);
  EXPECT_THROW(g.steps(0.0), DomainError);
  const auto [i, j] = g.index_of(RotPoint{0.5, 0.25});
  EXPECT_EQ(i, 32);
  EXPECT_EQ(j, 16);
  EXPECT_THROW(g.index_of(RotPoint{0.5, 0.251}), DomainError);
  EXPECT_THROW(RotatedGrid(0, 1, 1), ConfigurationError);
}

TEST(Differences, FirstOrder) {
  const double eps = 0.125;
  const RotPoint q{0.3, 0.4};
  auto constant = [](RotPoint) { return 4.2; };
  auto tau = [](RotPoint p) { return p.tau; };
  EXPECT_EQ(delta1(constant, q, eps), 0.0);
  EXPECT_EQ(delta2(constant, q, eps), 0.0);
  EXPECT_NEAR(delta1(tau, q, eps, Sign::plus), eps, 1e-15);
  EXPECT_NEAR(delta1(tau, q, eps, Sign::minus), -eps, 1e-15);
  EXPECT_EQ(delta2(tau, q, eps), 0.0);
}

TEST(Differences, SecondDifference) {
  const double eps = 0.0625;
  const RotPoint q{0.5, 0.25};
  auto bilinear = [](RotPoint p) { return p.tau * p.lambda; };
  auto affine = [](RotPoint p) { return 3.0 - 2.0 * p.tau + 0.5 * p.lambda; };
  EXPECT_NEAR(second_diff(bilinear, q, eps, Sign::plus), eps * eps, 1e-15);
  EXPECT_NEAR(second_diff(bilinear, q, eps, Sign::minus), -eps * eps, 1e-15);
  EXPECT_NEAR(second_diff(affine, q, eps, Sign::plus), 0.0, 1e-15);

  // Composition delta1 after delta2, evaluated the same way.
  auto d2 = [&](RotPoint p) { return delta2(bilinear, p, eps); };
  EXPECT_EQ(second_diff(bilinear, q, eps, Sign::plus), delta1(d2, q, eps, Sign::plus));
}

TEST(Differences, OneVariableFunctionsVanishExactly) {
  auto g = [](RotPoint p) { return std::exp(std::sin(7.0 * p.tau)); };
  auto h = [](RotPoint p) { return std::cos(3.0 * p.lambda) * 1e3; };
  for (int k = 1; k <= 8; ++k) {
    const RotPoint q{0.1 * k, 0.05 * k};
    for (Sign s : {Sign::plus, Sign::minus}) {
      EXPECT_EQ(second_diff(g, q, 0.03125 * k, s), 0.0);
      EXPECT_EQ(second_diff(h, q, 0.03125 * k, s), 0.0);
    }
  }
}

namespace {

// Direct four-point evaluation in physical coordinates.
template <typename Fn>
double direct_stencil(const Fn& f, PhysPoint p, double e, Stencil k) {
  if (k == Stencil::first)
    return f(PhysPoint{p.t, p.x + 2 * e}) - f(PhysPoint{p.t - e, p.x + e}) - f(PhysPoint{p.t + e, p.x + e}) +
           f(p);
  return f(PhysPoint{p.t + 2 * e, p.x}) - f(PhysPoint{p.t + e, p.x - e}) - f(PhysPoint{p.t + e, p.x + e}) + f(p);
}

}  // namespace

TEST(OriginalCoordinates, QuadraticExample) {
  // Worked by hand from the four-point definition: t^2 and -x^2 each contribute -2 eps^2.
  auto f = [](PhysPoint p) { return p.t * p.t - p.x * p.x; };
  const PhysPoint p{0.7, 0.1};
  const double e = 0.01;
  EXPECT_NEAR(direct_stencil(f, p, e, Stencil::first), -4 * e * e, 1e-15);
  EXPECT_NEAR(original_coord_diff(f, p, e, Stencil::first), -4 * e * e, 1e-14);
}

TEST(OriginalCoordinates, AffineVanishes) {
  auto f = [](PhysPoint p) { return 1.5 + 2.0 * p.t - 0.25 * p.x; };
  for (Stencil k : {Stencil::first, Stencil::second})
    EXPECT_NEAR(original_coord_diff(f, PhysPoint{0.9, -0.2}, 0.05, k), 0.0, 1e-14);
}

TEST(OriginalCoordinates, MatchesDirectStencilOnSmoothFunctions) {
  auto f = [](PhysPoint p) { return std::sin(2.0 * p.t) * std::exp(-p.x * p.x) + p.t * p.x * p.x; };
  for (int k = 0; k < 50; ++k) {
    const PhysPoint p{0.5 + 0.02 * k, -0.4 + 0.017 * k};
    const double e = 0.001 * (1 + k % 7);
    for (Stencil s : {Stencil::first, Stencil::second})
      EXPECT_NEAR(original_coord_diff(f, p, e, s), direct_stencil(f, p, e, s), 1e-12);
  }
}
