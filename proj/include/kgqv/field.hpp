#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "kgqv/coords.hpp"
#include "kgqv/errors.hpp"
#include "kgqv/greens.hpp"

namespace kgqv {

enum class FieldKind { nonlinear, linear, drift_part, critical_part, oracle };

inline std::string_view to_string(FieldKind k) noexcept {
  switch (k) {
    case FieldKind::nonlinear: return "nonlinear";
    case FieldKind::linear: return "linear";
    case FieldKind::drift_part: return "drift_part";
    case FieldKind::critical_part: return "critical_part";
    case FieldKind::oracle: return "oracle";
  }
  return "unknown";
}

/// Lattice values over the window of a RotatedGrid. Points below the initial
/// line (i + j < 0) hold NaN and are rejected by the checked accessors.
class FieldSample {
 public:
  FieldSample() = default;

  FieldSample(const RotatedGrid& grid, const PhysParams& params, FieldKind kind, std::uint64_t noise_seed = 0)
      : grid_(grid),
        params_(params),
        kind_(kind),
        noise_seed_(noise_seed),
        stride_(grid.extent()),
        values_(static_cast<std::size_t>(stride_) * static_cast<std::size_t>(stride_),
                std::numeric_limits<double>::quiet_NaN()) {}

  const RotatedGrid& grid() const noexcept { return grid_; }
  const PhysParams& params() const noexcept { return params_; }
  FieldKind kind() const noexcept { return kind_; }
  std::uint64_t noise_seed() const noexcept { return noise_seed_; }

  void reset(const PhysParams& params, FieldKind kind, std::uint64_t noise_seed) noexcept {
    params_ = params;
    kind_ = kind;
    noise_seed_ = noise_seed;
  }

  double at(int i, int j) const {
    if (!grid_.contains(i, j))
      throw DomainError("lattice point (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is outside the simulated window");
    return values_[offset(i, j)];
  }

  double& operator()(int i, int j) noexcept { return values_[offset(i, j)]; }
  double operator()(int i, int j) const noexcept { return values_[offset(i, j)]; }

  /// Value at a rotated point that must be a lattice point of the window.
  double value_at(RotPoint q) const {
    const auto [i, j] = grid_.index_of(q);
    return at(i, j);
  }

  /// Value at a physical point whose rotated image is a lattice point.
  double value_at(PhysPoint p) const { return value_at(to_rotated(p)); }

  /// Index form of the rectangular increment with k lattice steps:
  /// f(i+-k, j+k) - f(i+-k, j) - f(i, j+k) + f(i, j).
  double second_difference(int i, int j, int k, Sign sign) const {
    const int is = i + as_int(sign) * k;
    const double upper = at(is, j + k) - at(is, j);
    const double lower = at(i, j + k) - at(i, j);
    return upper - lower;
  }

  /// Fill every valid point with the same value (used for reference fields).
  template <typename Fn>
  void fill(Fn&& f) {
    for (int i = grid_.i_min(); i <= grid_.i_max(); ++i)
      for (int j = std::max(grid_.j_min(), -i); j <= grid_.j_max(); ++j) (*this)(i, j) = f(i, j);
  }

  /// Row-major CSV dump: i, j, tau, lambda, value.
  void write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigurationError("cannot open " + path.string() + " for writing");
    out << "i,j,tau,lambda,value\n" << std::setprecision(17);
    for (int i = grid_.i_min(); i <= grid_.i_max(); ++i)
      for (int j = std::max(grid_.j_min(), -i); j <= grid_.j_max(); ++j) {
        const RotPoint q = grid_.point(i, j);
        out << i << ',' << j << ',' << q.tau << ',' << q.lambda << ',' << (*this)(i, j) << '\n';
      }
  }

 private:
  std::size_t offset(int i, int j) const noexcept {
    return static_cast<std::size_t>(i - grid_.i_min()) * static_cast<std::size_t>(stride_) +
           static_cast<std::size_t>(j - grid_.j_min());
  }

  RotatedGrid grid_;
  PhysParams params_;
  FieldKind kind_ = FieldKind::nonlinear;
  std::uint64_t noise_seed_ = 0;
  int stride_ = 0;
  std::vector<double> values_;
};

}  // namespace kgqv
