#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kgqv/greens.hpp"

using namespace kgqv;
using std::numbers::pi;

TEST(FourierGreen, BranchExamples) {
  EXPECT_NEAR(fourier_green_branch(0, 0, 2, 3), std::sin(6.0) / 3.0, 1e-15);
  EXPECT_NEAR(fourier_green_branch(2, 1, 3, 0), 3.0 * std::exp(-3.0), 1e-15);
  EXPECT_NEAR(fourier_green_branch(2, 0, 1, 0), std::exp(-1.0) * std::sinh(1.0), 1e-15);
  EXPECT_EQ(classify(2, 1, 0), Regime::critical);
  EXPECT_EQ(classify(2, 0, 0.5), Regime::hyperbolic);
  EXPECT_EQ(classify(2, 0, 1.5), Regime::oscillatory);
}

TEST(FourierGreen, UnifiedExamples) {
  for (double xi : {0.999, 1.001}) {
    const double b = fourier_green_branch(2, 0, 1, xi);
    EXPECT_NEAR(fourier_green_unified(2, 0, 1, xi), b, 1e-10 * std::abs(b));
  }
  EXPECT_NEAR(fourier_green_unified(0, 1, pi, 0), 0.0, 1e-15);
  EXPECT_NEAR(fourier_green_unified(2, 1, 3, 0), 3.0 * std::exp(-3.0), 1e-15);
}

TEST(FourierGreen, BranchPointNeighbourhood) {
  // d = xi^2 + m^2 - a^2/4 straddling 0 at several scales.
  const double a = 2.0, t = 1.7;
  for (double delta : {1e-14, 1e-11, 1e-9, 1e-8, 2e-8, 1e-6, 1e-3}) {
    for (double sgn : {-1.0, 1.0}) {
      const double xi = std::sqrt(1.0 + sgn * delta);
      const double b = fourier_green_branch(a, 0, t, xi);
      const double u = fourier_green_unified(a, 0, t, xi);
      EXPECT_LE(std::abs(b - u), 1e-10 * (1.0 + std::abs(b))) << delta << " " << sgn;
    }
  }
}

TEST(FourierGreen, NegativeTimeRejected) {
  EXPECT_THROW(fourier_green_branch(1, 1, -0.1, 0), DomainError);
  EXPECT_THROW(fourier_green_unified(1, 1, -0.1, 0), DomainError);
}

TEST(FourierGreen, InitialConditions) {
  for (double xi : {0.0, 0.3, 1.0, 5.0}) {
    for (auto [a, m] : {std::pair{1.0, 0.5}, {2.0, 0.0}, {0.0, 1.0}, {-1.0, 0.2}}) {
      EXPECT_EQ(fourier_green_unified(a, m, 0.0, xi), 0.0);
      const double h = 1e-5;
      const double d = (-3.0 * fourier_green_unified(a, m, 0.0, xi) + 4.0 * fourier_green_unified(a, m, h, xi) -
                        fourier_green_unified(a, m, 2 * h, xi)) /
                       (2 * h);
      EXPECT_NEAR(d, 1.0, 1e-6);
    }
  }
}

TEST(FourierGreen, OdeResidualIsSecondOrder) {
  // G'' + a G' + (xi^2 + m^2) G = 0 with central differences.
  auto residual = [](double a, double m, double t, double xi, double h) {
    auto g = [&](double s) { return fourier_green_unified(a, m, s, xi); };
    const double d2 = (g(t + h) - 2 * g(t) + g(t - h)) / (h * h);
    const double d1 = (g(t + h) - g(t - h)) / (2 * h);
    return d2 + a * d1 + (xi * xi + m * m) * g(t);
  };
  for (auto [a, m, xi] : {std::tuple{1.0, 0.5, 2.0}, {2.0, 0.0, 0.3}, {0.5, 1.0, 0.0}, {3.0, 0.2, 1.0}}) {
    const double r1 = std::abs(residual(a, m, 1.3, xi, 2e-3));
    const double r2 = std::abs(residual(a, m, 1.3, xi, 1e-3));
    EXPECT_LT(r2, 1e-5);
    EXPECT_NEAR(r1 / r2, 4.0, 0.5);
  }
}

TEST(SpectralNorm, UndampedMasslessIsPi) {
  const SpectralNorm s = l2_spectral_norm(0, 0, 1, 400, 0.01);
  EXPECT_NEAR(s.value, pi, 0.01 * pi);
  EXPECT_GT(s.tail_bound, 0.0);
  EXPECT_EQ(l2_spectral_norm(0, 0, 0, 400, 0.01).value, 0.0);
}

TEST(SpectralNorm, CriticalCaseClosedForm) {
  // m^2 = a^2/4: |FG|^2 = e^{-at} sin^2(t xi)/xi^2, whose integral is pi t e^{-at}.
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const double v = l2_spectral_norm(1.0, 0.5, t, 400, 0.005).value;
    EXPECT_NEAR(v, pi * t * std::exp(-t), 0.01 * pi * t * std::exp(-t));
    EXPECT_LE(v, pi * (1 + t * t));
  }
}

TEST(SpectralNorm, BoundedByQuadraticGrowth) {
  double c = 0.0;
  for (double t : {0.5, 1.0, 2.0, 4.0}) c = std::max(c, l2_spectral_norm(0.0, 0.5, t, 400, 0.01).value / (1 + t * t));
  EXPECT_LT(c, 10.0);
}

TEST(SpectralNorm, RejectsUnreliableTails) {
  EXPECT_THROW(l2_spectral_norm(0, 0, 1, 10, 0.01), QuadratureError);
  EXPECT_THROW(l2_spectral_norm(4, 0, 1, 3, 0.01), QuadratureError);
  EXPECT_THROW(l2_spectral_norm(0, 0, 1, 100, 0.0), QuadratureError);
}

TEST(CriticalKernel, Examples) {
  EXPECT_EQ(critical_kernel(0, 1, 0.5), 0.5);
  EXPECT_NEAR(critical_kernel(2, 1, 0), std::exp(-1.0) / 2, 1e-16);
  EXPECT_EQ(critical_kernel(2, 1, 2), 0.0);
}

TEST(CriticalKernel, InverseFourierTransformOfUnifiedFormula) {
  // Gaussian-damped inverse transform by Simpson's rule. The damping turns the
  // light-cone indicator into (erf((t+x)L/2) + erf((t-x)L/2))/2, which is 1 or
  // 0 to double precision at these points.
  const double a = 1.2, m = 0.6, L = 200.0;
  const double xi_max = 6.0 * L, h = 0.005;
  struct P {
    double t, x;
  };
  for (P p : {P{1.0, 0.0}, P{1.0, 0.5}, P{2.0, -1.2}, P{0.7, 0.9}, P{1.5, 1.8}}) {
    auto f = [&](double xi) {
      return std::cos(xi * p.x) * fourier_green_unified(a, m, p.t, xi) * std::exp(-(xi / L) * (xi / L));
    };
    const long n = static_cast<long>(xi_max / h);
    double s = f(0) + f(xi_max);
    for (long k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
    const double inverse = 2.0 * s * h / 3.0 / (2.0 * pi);
    EXPECT_NEAR(inverse, critical_kernel(a, p.t, p.x), 1e-3) << p.t << " " << p.x;
  }
}

TEST(ConeL2, ClosedForm) {
  for (double a : {0.5, 1.0, 2.0, -0.5}) {
    for (double t : {0.25, 1.0, 3.0}) {
      const double exact = 0.5 * (1.0 - std::exp(-a * t) * (1.0 + a * t)) / (a * a);
      EXPECT_NEAR(cone_l2_squared(a, t), exact, 1e-12);
    }
  }
  EXPECT_NEAR(cone_l2_squared(0.0, 2.0), 1.0, 1e-14);  // t^2/4
  EXPECT_EQ(cone_l2_squared(1.0, 0.0), 0.0);
}

namespace {

// Independent closed form of the kernel second-difference integral. Every
// region's integrand is (k e^{-c u})^p in the lag u = S - sigma - mu, with
// S = sqrt2 t, c = a/(2 sqrt2); the regions reduce to one-dimensional
// integrals in u with the weights below.
double kernel_lp_closed_form(double a, double p, double t, double e) {
  const double c = a / (2.0 * kSqrt2);
  const double q = p * c;
  const double S = kSqrt2 * t;
  const double k4 = 0.5, k1 = 0.5 * std::abs(std::exp(c * e) - 1.0), k3 = 0.5 * std::pow(std::exp(c * e) - 1.0, 2);
  const double side = (1.0 - std::exp(-q * e)) / q;
  const double d4 = side * side;
  const double d1 = (std::exp(-q * e) * side - e * std::exp(-q * S)) / q;
  const double s3 = S - 2.0 * e;
  const double d3 = std::exp(-2.0 * q * e) * (1.0 - std::exp(-q * s3) * (1.0 + q * s3)) / (q * q);
  return std::pow(k4, p) * d4 + 2.0 * std::pow(k1, p) * d1 + std::pow(k3, p) * d3;
}

}  // namespace

TEST(KernelSecondDifference, UndampedIsExact) {
  for (double p : {1.0, 2.0, 3.0})
    for (double e : {1.0 / 16, 1.0 / 64, 1.0 / 256})
      EXPECT_NEAR(kernel_second_difference_lp(0.0, p, 1.0, 0.0, e), e * e / std::pow(2.0, p),
                  1e-12 * e * e);
}

TEST(KernelSecondDifference, MatchesClosedForm) {
  for (double a : {-0.5, 1.0, 2.0}) {
    for (double p : {1.0, 1.5, 2.0}) {
      for (double e : {1.0 / 16, 1.0 / 64, 1.0 / 256}) {
        for (double x : {0.0, 0.3}) {
          const double ref = kernel_lp_closed_form(a, p, 1.0, e);
          EXPECT_NEAR(kernel_second_difference_lp(a, p, 1.0, x, e), ref, 1e-8 * ref)
              << "a=" << a << " p=" << p << " e=" << e << " x=" << x;
        }
      }
    }
  }
}

TEST(KernelSecondDifference, RatioTendsToPowerOfTwoForP2) {
  double prev = 1.0;
  for (double e : {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const double dev = std::abs(kernel_second_difference_lp(1.0, 2.0, 1.0, 0.0, e) / (e * e) - 0.25);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 0.05 * 0.25);
}

TEST(KernelSecondDifference, FrozenValues) {
  // Closed-form values, frozen: ratio value/eps^2 at t=1, x=0.
  EXPECT_NEAR(kernel_lp_closed_form(1.0, 2.0, 1.0, 1.0 / 16) / (1.0 / 256), 0.24245, 5e-5);
  EXPECT_NEAR(kernel_lp_closed_form(1.0, 2.0, 1.0, 1.0 / 256) / std::pow(1.0 / 256, 2), 0.24953, 5e-5);
  EXPECT_NEAR(kernel_lp_closed_form(1.0, 1.0, 1.0, 1.0 / 16) / (1.0 / 256), 0.8917, 5e-4);
}

TEST(KernelSecondDifference, Preconditions) {
  EXPECT_THROW(kernel_second_difference_lp(1, 0.5, 1, 0, 0.01), DomainError);
  EXPECT_THROW(kernel_second_difference_lp(1, 2, 1, 0, 0.75), GeometryError);
  EXPECT_THROW(kernel_second_difference_lp(1, 2, 1, 0, 0.0), GeometryError);
}
