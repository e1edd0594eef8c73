#pragma once

// Green function of the damped Klein-Gordon operator
//   d_tt - d_xx + a d_t + m^2
// in Fourier space, the critically damped physical kernel, and the kernel
// second-difference integrals over the four regions of the cone split.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "kgqv/coords.hpp"
#include "kgqv/diffusion.hpp"
#include "kgqv/errors.hpp"

namespace kgqv {

struct PhysParams {
  double a = 1.0;      ///< damping (a < 0 is excitation)
  double m = 0.5;      ///< mass
  double theta = 1.0;  ///< noise scale
  DiffusionId diffusion = DiffusionId::shifted_sine;

  /// Coefficient of the linear drift b(u) = (a^2/4 - m^2) u left over after
  /// rewriting the operator around critical damping.
  double drift_coefficient() const noexcept { return a * a / 4.0 - m * m; }

  void validate() const {
    if (!std::isfinite(a)) throw ConfigurationError("damping a must be finite");
    if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigurationError("mass m must be finite and >= 0");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigurationError("theta must be finite and > 0");
  }
};

enum class Regime { oscillatory, critical, hyperbolic };

/// Sign of xi^2 + m^2 - a^2/4 decides the branch.
inline Regime classify(double a, double m, double xi) noexcept {
  const double d = xi * xi + m * m - a * a / 4.0;
  if (d > 0.0) return Regime::oscillatory;
  if (d < 0.0) return Regime::hyperbolic;
  return Regime::critical;
}

namespace detail {

inline void require_nonnegative_time(double t) {
  if (!(t >= 0.0)) throw DomainError("Green function needs t >= 0, got " + std::to_string(t));
}

/// sin(t sqrt(d)) / sqrt(d) for |d| small, as a series in t^2 d (valid for either sign of d).
inline double sinc_series(double t, double d) noexcept {
  const double z = t * t * d;
  return t * (1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0 * (1.0 - z / 72.0))));
}

}  // namespace detail

/// Threshold on |xi^2 + m^2 - a^2/4| below which the unified formula switches to its series.
inline constexpr double kBranchPointBand = 1e-8;

/// Fourier transform of G(t, .) at xi, by explicit regime.
inline double fourier_green_branch(double a, double m, double t, double xi) {
  detail::require_nonnegative_time(t);
  const double decay = std::exp(-a * t / 2.0);
  const double d = xi * xi + m * m - a * a / 4.0;
  switch (classify(a, m, xi)) {
    case Regime::oscillatory: {
      const double w = std::sqrt(d);
      return decay * std::sin(t * w) / w;
    }
    case Regime::critical: return decay * t;
    case Regime::hyperbolic: {
      const double w = std::sqrt(-d);
      return decay * std::sinh(t * w) / w;
    }
  }
  return 0.0;
}

/// Same quantity through the single formula e^{-at/2} sin(t w)/w with w the
/// complex square root of xi^2 + m^2 - a^2/4.
inline double fourier_green_unified(double a, double m, double t, double xi) {
  detail::require_nonnegative_time(t);
  const double decay = std::exp(-a * t / 2.0);
  const double d = xi * xi + m * m - a * a / 4.0;
  if (std::abs(d) < kBranchPointBand) return decay * detail::sinc_series(t, d);
  const std::complex<double> w = std::sqrt(std::complex<double>(d, 0.0));
  return decay * (std::sin(t * w) / w).real();
}

struct SpectralNorm {
  double value = 0.0;       ///< quadrature of |FG(t)(xi)|^2 over [-cutoff, cutoff]
  double tail_bound = 0.0;  ///< bound on the discarded |xi| > cutoff mass
};

/// Integral of |FG(t)(xi)|^2 over the real line, truncated symmetrically at
/// `cutoff` (composite Simpson with spacing at most `step`). Beyond
/// xi >= 2K, K^2 = max(a^2/4 - m^2, 0), the integrand is at most
/// (4/3) e^{-at} / xi^2, which gives the tail bound.
inline SpectralNorm l2_spectral_norm(double a, double m, double t, double cutoff, double step,
                                     double rel_tol = 1e-2) {
  detail::require_nonnegative_time(t);
  if (!(step > 0.0) || !(cutoff > 0.0)) throw QuadratureError("cutoff and step must be positive");
  const double k2 = std::max(a * a / 4.0 - m * m, 0.0);
  if (cutoff * cutoff < 4.0 * k2)
    throw QuadratureError("cutoff lies inside the growing band; the 1/xi^2 tail bound does not apply");
  if (t == 0.0) return {0.0, 0.0};

  auto sq = [&](double xi) {
    const double g = fourier_green_unified(a, m, t, xi);
    return g * g;
  };
  long intervals = static_cast<long>(std::ceil(cutoff / step));
  if (intervals % 2 != 0) ++intervals;
  const double h = cutoff / static_cast<double>(intervals);
  double sum = sq(0.0) + sq(cutoff);
  for (long k = 1; k < intervals; ++k) sum += (k % 2 != 0 ? 4.0 : 2.0) * sq(h * static_cast<double>(k));
  const double half = sum * h / 3.0;

  const double envelope = k2 > 0.0 ? 4.0 / 3.0 : 1.0;
  SpectralNorm out{2.0 * half, 2.0 * envelope * std::exp(-a * t) / cutoff};
  if (!std::isfinite(out.value)) throw QuadratureError("non-finite spectral quadrature");
  if (out.tail_bound > rel_tol * out.value)
    throw QuadratureError("tail bound " + std::to_string(out.tail_bound) + " exceeds tolerance; raise the cutoff");
  return out;
}

/// Critically damped kernel Gamma(t, x) = e^{-at/2}/2 on |x| < t.
inline double critical_kernel(double a, double t, double x) noexcept {
  return std::abs(x) < t ? 0.5 * std::exp(-a * t / 2.0) : 0.0;
}

/// Integral of Gamma(t - s, .)^2 over the backward cone of (t, x): the variance
/// of the linear critically damped field at time t.
inline double cone_l2_squared(double a, double t) {
  detail::require_nonnegative_time(t);
  if (t == 0.0) return 0.0;
  // The cone slice at lag r has width 2r.
  auto integrand = [a](double r) {
    const double g = 0.5 * std::exp(-a * r / 2.0);
    return 2.0 * r * g * g;
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, t, 15, 1e-13);
}

/// Integral over (s, y) of |Gamma - Gamma_1 - Gamma_2 + Gamma_3|^p with the
/// shifted kernels Gamma(t - eps/sqrt2 - s, x +- eps/sqrt2 - y) and
/// Gamma(t - sqrt2 eps - s, x - y).
///
/// In the rotated frame the four apexes are (tau, lambda), (tau - eps, lambda),
/// (tau, lambda - eps) and (tau - eps, lambda - eps), and the cone of (t, x)
/// splits into
///   D4: the eps x eps square under the apex (only Gamma alive),
///   D1: the lambda-strip beside it (Gamma and Gamma_1),
///   D2: the tau-strip beside it (Gamma and Gamma_2),
///   D3: the remaining triangle (all four alive).
/// Each piece is a polygon on which the integrand is a single exponential in
/// s; every piece is integrated by nested adaptive Gauss-Kronrod over its own
/// bounds.
inline double kernel_second_difference_lp(double a, double p, double t, double x, double eps) {
  if (!(p >= 1.0)) throw DomainError("exponent p must be >= 1");
  if (!(eps > 0.0) || !(kSqrt2 * eps < t))
    throw GeometryError("kernel second difference needs 0 < sqrt2*eps < t");

  const RotPoint apex = to_rotated(PhysPoint{t, x});
  const double tau = apex.tau;
  const double lam = apex.lambda;
  // Rotated step e per lattice direction shifts physical time by e/sqrt2.
  const double c = a / (2.0 * kSqrt2);
  const double lag0 = tau + lam;  // sqrt2 * t

  // Kernel of an apex whose rotated index sum is `apex_sum`, at a source
  // (sigma, mu) inside its cone: e^{-a (t_apex - s)/2} / 2.
  auto kernel = [c](double apex_sum, double sigma, double mu) {
    return 0.5 * std::exp(-c * (apex_sum - sigma - mu));
  };

  auto pw = [p](double v) { return p == 1.0 ? std::abs(v) : (p == 2.0 ? v * v : std::pow(std::abs(v), p)); };

  // Shifting the apex by k rotated steps multiplies the kernel by e^{c k eps},
  // so the differences factor exactly; expm1 avoids the O(eps^2) cancellation
  // that would otherwise keep the adaptive rule from converging.
  const double d1 = -std::expm1(c * eps);
  const double d3 = d1 * d1;
  auto f_d4 = [&](double s, double m_) { return pw(kernel(lag0, s, m_)); };
  auto f_d1 = [&](double s, double m_) { return pw(d1 * kernel(lag0, s, m_)); };
  auto f_d3 = [&](double s, double m_) { return pw(d3 * kernel(lag0, s, m_)); };

  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  constexpr unsigned depth = 12;
  constexpr double tol = 1e-12;

  // Outer variable sigma, inner mu in [mu_lo(sigma), mu_hi].
  auto integrate_sigma_outer = [&](auto&& f, double s_lo, double s_hi, auto&& mu_lo, double mu_hi) {
    auto inner = [&](double s) {
      const double lo = mu_lo(s);
      if (lo >= mu_hi) return 0.0;
      return GK::integrate([&](double m_) { return f(s, m_); }, lo, mu_hi, depth, tol);
    };
    return GK::integrate(inner, s_lo, s_hi, depth, tol);
  };
  // Outer variable mu, inner sigma.
  auto integrate_mu_outer = [&](auto&& f, double m_lo, double m_hi, auto&& s_lo, double s_hi) {
    auto inner = [&](double m_) {
      const double lo = s_lo(m_);
      if (lo >= s_hi) return 0.0;
      return GK::integrate([&](double s) { return f(s, m_); }, lo, s_hi, depth, tol);
    };
    return GK::integrate(inner, m_lo, m_hi, depth, tol);
  };

  const auto fixed = [](double v) { return [v](double) { return v; }; };
  const auto anti_diag = [](double v) { return -v; };

  const double i4 = integrate_sigma_outer(f_d4, tau - eps, tau, fixed(lam - eps), lam);
  const double i1 = integrate_mu_outer(f_d1, lam - eps, lam, anti_diag, tau - eps);
  const double i2 = integrate_sigma_outer(f_d1, tau - eps, tau, anti_diag, lam - eps);
  const double i3 = integrate_sigma_outer(f_d3, -(lam - eps), tau - eps, anti_diag, lam - eps);
  return i1 + i2 + i3 + i4;
}

}  // namespace kgqv
