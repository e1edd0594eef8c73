#pragma once

// Physical (t, x) and characteristic (tau, lambda) frames, the rotated lattice,
// and the rectangular difference operators used throughout the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>

#include "kgqv/errors.hpp"

namespace kgqv {

inline constexpr double kSqrt2 = std::numbers::sqrt2;

struct PhysPoint {
  double t = 0.0;
  double x = 0.0;
};

struct RotPoint {
  double tau = 0.0;
  double lambda = 0.0;
};

/// Rotation by -45 degrees: tau = (t - x)/sqrt2, lambda = (t + x)/sqrt2.
constexpr RotPoint to_rotated(PhysPoint p) noexcept {
  return {(p.t - p.x) / kSqrt2, (p.t + p.x) / kSqrt2};
}

constexpr PhysPoint to_physical(RotPoint q) noexcept {
  return {(q.tau + q.lambda) / kSqrt2, (q.lambda - q.tau) / kSqrt2};
}

/// Direction of the first-coordinate shift in a rectangular increment.
enum class Sign : int { plus = 1, minus = -1 };

constexpr double as_double(Sign s) noexcept { return static_cast<double>(static_cast<int>(s)); }
constexpr int as_int(Sign s) noexcept { return static_cast<int>(s); }

/// Uniform lattice tau_i = i/n, lambda_j = j/n restricted to the window
/// {i <= i_max, j <= j_max, i + j >= 0}. The lower index bounds follow from
/// the half-plane constraint: i >= -j_max and j >= -i_max.
class RotatedGrid {
 public:
  RotatedGrid() = default;

  RotatedGrid(int n, int i_max, int j_max) : n_(n), i_max_(i_max), j_max_(j_max) {
    if (n < 1) throw ConfigurationError("grid resolution must be >= 1, got " + std::to_string(n));
    if (i_max < 0 || j_max < 0)
      throw ConfigurationError("grid window bounds must be non-negative");
  }

  /// Window covering the domain of dependence of [0,1]^2: i, j in [-n, n].
  static RotatedGrid unit_window(int n) { return {n, n, n}; }

  /// Smallest window containing every lattice point with tau <= tau_max and
  /// lambda <= lambda_max.
  static RotatedGrid covering(int n, double tau_max, double lambda_max) {
    auto top = [n](double v) {
      const double scaled = v * n;
      const double r = std::round(scaled);
      return static_cast<int>(std::abs(scaled - r) < 1e-9 ? r : std::ceil(scaled));
    };
    return {n, std::max(0, top(tau_max)), std::max(0, top(lambda_max))};
  }

  int n() const noexcept { return n_; }
  double eps() const noexcept { return 1.0 / n_; }
  int i_min() const noexcept { return -j_max_; }
  int i_max() const noexcept { return i_max_; }
  int j_min() const noexcept { return -i_max_; }
  int j_max() const noexcept { return j_max_; }
  /// Side length of the dense index box [i_min, i_max] x [j_min, j_max].
  int extent() const noexcept { return i_max_ + j_max_ + 1; }

  bool contains(int i, int j) const noexcept {
    return i <= i_max_ && j <= j_max_ && i + j >= 0;
  }

  /// Cell with bottom vertex (i, j): needs i + j >= 0 and its top vertex in the window.
  bool contains_cell(int i, int j) const noexcept {
    return i + j >= 0 && i + 1 <= i_max_ && j + 1 <= j_max_;
  }

  RotPoint point(int i, int j) const noexcept {
    return {static_cast<double>(i) / n_, static_cast<double>(j) / n_};
  }

  /// Number of lattice steps in eps; rejects increments that are not an
  /// integer multiple of the spacing.
  int steps(double eps) const {
    const double scaled = eps * n_;
    const double r = std::round(scaled);
    if (!(r >= 1.0) || std::abs(scaled - r) > 1e-9 * std::max(1.0, r))
      throw DomainError("increment " + std::to_string(eps) +
                        " is not a positive multiple of the grid spacing 1/" + std::to_string(n_));
    return static_cast<int>(r);
  }

  /// Lattice index of a rotated point; the point must sit on the lattice.
  std::pair<int, int> index_of(RotPoint q) const {
    const double si = q.tau * n_;
    const double sj = q.lambda * n_;
    const double ri = std::round(si);
    const double rj = std::round(sj);
    if (std::abs(si - ri) > 1e-9 || std::abs(sj - rj) > 1e-9)
      throw DomainError("point (" + std::to_string(q.tau) + ", " + std::to_string(q.lambda) +
                        ") is not a lattice point");
    return {static_cast<int>(ri), static_cast<int>(rj)};
  }

  friend bool operator==(const RotatedGrid&, const RotatedGrid&) = default;

 private:
  int n_ = 1;
  int i_max_ = 1;
  int j_max_ = 1;
};

// Difference operators on a function f : RotPoint -> double.

template <typename Fn>
double delta1(const Fn& f, RotPoint q, double eps, Sign sign = Sign::plus) {
  return f(RotPoint{q.tau + as_double(sign) * eps, q.lambda}) - f(q);
}

template <typename Fn>
double delta2(const Fn& f, RotPoint q, double eps, Sign sign = Sign::plus) {
  return f(RotPoint{q.tau, q.lambda + as_double(sign) * eps}) - f(q);
}

/// delta1_{+-eps} delta2_{eps} f(q), grouped exactly as the composition
/// (f(tau+-eps, lambda+eps) - f(tau+-eps, lambda)) - (f(tau, lambda+eps) - f(tau, lambda)).
template <typename Fn>
double second_diff(const Fn& f, RotPoint q, double eps, Sign sign) {
  const double ts = q.tau + as_double(sign) * eps;
  const double upper = f(RotPoint{ts, q.lambda + eps}) - f(RotPoint{ts, q.lambda});
  const double lower = f(RotPoint{q.tau, q.lambda + eps}) - f(q);
  return upper - lower;
}

/// Which of the two physical-coordinate rectangular increments.
enum class Stencil : int { first = 1, second = 2 };

/// Physical-coordinate increment
///   first:  f(t, x+2e) - f(t-e, x+e) - f(t+e, x+e) + f(t, x)
///   second: f(t+2e, x) - f(t+e, x-e) - f(t+e, x+e) + f(t, x)
/// evaluated through the rotated frame: with h = sqrt2 * eps these are
/// delta1_{-h} delta2_{h} and delta1_{+h} delta2_{h} of f o to_physical at the
/// rotated image of (t, x).
template <typename PhysFn>
double original_coord_diff(const PhysFn& f_phys, PhysPoint p, double eps, Stencil k) {
  const auto rotated = [&f_phys](RotPoint q) { return f_phys(to_physical(q)); };
  const Sign sign = k == Stencil::first ? Sign::minus : Sign::plus;
  return second_diff(rotated, to_rotated(p), kSqrt2 * eps, sign);
}

}  // namespace kgqv
