#pragma once

// Space-time white noise restricted to the rotated lattice. A realization is
// a Gaussian per cell (variance eps^2, the cell area) and a Gaussian per
// initial-layer triangle (variance eps^2/2). Each value is a pure function of
// (master seed, resolution, index), generated by Philox blocks of four lanes.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "kgqv/coords.hpp"
#include "kgqv/errors.hpp"
#include "kgqv/philox.hpp"

namespace kgqv {

enum class NoiseKind : std::uint64_t { cell = 0, seed_triangle = 1 };

namespace detail {

inline rng::Counter noise_counter(NoiseKind kind, std::int64_t major, std::int64_t minor) noexcept {
  // minor >> 2 floors for negative indices too, so lanes are (minor & 3).
  return {static_cast<std::uint64_t>(major), static_cast<std::uint64_t>(minor >> 2),
          static_cast<std::uint64_t>(kind), 0};
}

inline rng::Key noise_key(std::uint64_t master_seed, int n) noexcept {
  return {master_seed, static_cast<std::uint64_t>(n)};
}

}  // namespace detail

/// Standard normal attached to a cell (i, j) or a layer-1 triangle (i, 1-i),
/// before scaling by the region's standard deviation.
inline double unit_normal(std::uint64_t master_seed, int n, NoiseKind kind, std::int64_t i,
                          std::int64_t j) noexcept {
  const auto block = rng::normal_block(detail::noise_counter(kind, i, j), detail::noise_key(master_seed, n));
  return block[static_cast<std::size_t>(j & 3)];
}

class NoiseField {
 public:
  NoiseField() = default;

  static NoiseField generate(const RotatedGrid& grid, std::uint64_t master_seed) {
    NoiseField f(grid);
    f.regenerate(master_seed);
    return f;
  }

  static NoiseField zeros(const RotatedGrid& grid, std::uint64_t master_seed = 0) {
    NoiseField f(grid);
    f.master_seed_ = master_seed;
    return f;
  }

  /// Refill in place for another seed on the same grid (no reallocation).
  void regenerate(std::uint64_t master_seed) {
    master_seed_ = master_seed;
    const int n = grid_.n();
    const rng::Key key = detail::noise_key(master_seed, n);
    const double cell_sd = grid_.eps();
    const double tri_sd = grid_.eps() / kSqrt2;

    for (int i = grid_.i_min(); i < grid_.i_max(); ++i) {
      const int j_lo = std::max(grid_.j_min(), -i);
      const int j_hi = grid_.j_max() - 1;
      double* row = &cells_[row_offset(i)];
      for (int jb = j_lo & ~3; jb <= j_hi; jb += 4) {
        const auto z = rng::normal_block(detail::noise_counter(NoiseKind::cell, i, jb), key);
        for (int lane = 0; lane < 4; ++lane) {
          const int j = jb + lane;
          if (j >= j_lo && j <= j_hi) row[j - grid_.j_min()] = cell_sd * z[static_cast<std::size_t>(lane)];
        }
      }
    }

    const int i_lo = seed_index_min();
    const int i_hi = seed_index_max();
    for (int ib = i_lo & ~3; ib <= i_hi; ib += 4) {
      const auto z = rng::normal_block(detail::noise_counter(NoiseKind::seed_triangle, 1, ib), key);
      for (int lane = 0; lane < 4; ++lane) {
        const int i = ib + lane;
        if (i >= i_lo && i <= i_hi) seeds_[static_cast<std::size_t>(i - i_lo)] = tri_sd * z[static_cast<std::size_t>(lane)];
      }
    }
  }

  const RotatedGrid& grid() const noexcept { return grid_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  bool empty() const noexcept { return cells_.empty(); }

  /// Increment over the cell with bottom vertex (i, j).
  double cell(int i, int j) const {
    if (!grid_.contains_cell(i, j))
      throw IndexError("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") is outside the noise window or below the initial line");
    return cell_unchecked(i, j);
  }

  /// Increment over the triangle under the layer-1 point (i, 1 - i).
  double seed_triangle(int i) const {
    if (i < seed_index_min() || i > seed_index_max())
      throw IndexError("layer-1 index " + std::to_string(i) + " is outside the noise window");
    return seed_unchecked(i);
  }

  double cell_unchecked(int i, int j) const noexcept { return cells_[row_offset(i) + (j - grid_.j_min())]; }
  double seed_unchecked(int i) const noexcept { return seeds_[static_cast<std::size_t>(i - seed_index_min())]; }

  double& cell_ref(int i, int j) {
    if (!grid_.contains_cell(i, j)) throw IndexError("cell outside the noise window");
    return cells_[row_offset(i) + (j - grid_.j_min())];
  }
  double& seed_ref(int i) {
    if (i < seed_index_min() || i > seed_index_max()) throw IndexError("layer-1 index outside the noise window");
    return seeds_[static_cast<std::size_t>(i - seed_index_min())];
  }

  /// Layer-1 points (i, 1-i) inside the window have i in [1 - j_max, i_max].
  int seed_index_min() const noexcept { return 1 - grid_.j_max(); }
  int seed_index_max() const noexcept { return grid_.i_max(); }

 private:
  explicit NoiseField(const RotatedGrid& grid)
      : grid_(grid),
        cell_stride_(grid.extent() - 1),
        cells_(static_cast<std::size_t>(cell_stride_) * static_cast<std::size_t>(cell_stride_), 0.0),
        seeds_(static_cast<std::size_t>(grid.i_max() + grid.j_max()), 0.0) {}

  std::size_t row_offset(int i) const noexcept {
    return static_cast<std::size_t>(i - grid_.i_min()) * static_cast<std::size_t>(cell_stride_);
  }

  RotatedGrid grid_;
  std::uint64_t master_seed_ = 0;
  int cell_stride_ = 0;
  std::vector<double> cells_;
  std::vector<double> seeds_;

  friend NoiseField load_noise_dump(const std::filesystem::path&);
};

inline NoiseField generate(const RotatedGrid& grid, std::uint64_t master_seed) {
  return NoiseField::generate(grid, master_seed);
}

inline double increment_over_cell(const NoiseField& field, int i, int j) { return field.cell(i, j); }

inline double increment_over_seed_triangle(const NoiseField& field, int i) { return field.seed_triangle(i); }

// Binary dump: four little-endian u64 header words (magic, version, n, seed),
// then f64 cell increments for bottom vertices i, j in [-n, n-1] (row-major in
// i, NaN below the initial line), then f64 triangle increments for i in [1-n, n].

inline constexpr std::uint64_t kNoiseDumpMagic = 0x53494F4E5651474BULL;  // "KGQVNOIS"
inline constexpr std::uint64_t kNoiseDumpVersion = 1;

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ConfigurationError("truncated noise dump");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

inline void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace detail

inline void write_noise_dump(const NoiseField& field, const std::filesystem::path& path) {
  const int n = field.grid().n();
  if (!(field.grid() == RotatedGrid::unit_window(n)))
    throw ConfigurationError("noise dumps are defined for the unit window only");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot open " + path.string() + " for writing");
  detail::put_u64(out, kNoiseDumpMagic);
  detail::put_u64(out, kNoiseDumpVersion);
  detail::put_u64(out, static_cast<std::uint64_t>(n));
  detail::put_u64(out, field.master_seed());
  for (int i = -n; i < n; ++i)
    for (int j = -n; j < n; ++j)
      detail::put_f64(out, i + j >= 0 ? field.cell_unchecked(i, j) : std::numeric_limits<double>::quiet_NaN());
  for (int i = 1 - n; i <= n; ++i) detail::put_f64(out, field.seed_unchecked(i));
}

inline NoiseField load_noise_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open " + path.string());
  if (detail::get_u64(in) != kNoiseDumpMagic) throw ConfigurationError("not a noise dump: bad magic");
  if (detail::get_u64(in) != kNoiseDumpVersion) throw ConfigurationError("unsupported noise dump version");
  const auto n64 = detail::get_u64(in);
  if (n64 < 1 || n64 > (1u << 20)) throw ConfigurationError("implausible resolution in noise dump");
  const int n = static_cast<int>(n64);
  NoiseField f(RotatedGrid::unit_window(n));
  f.master_seed_ = detail::get_u64(in);
  for (int i = -n; i < n; ++i)
    for (int j = -n; j < n; ++j) {
      const double v = detail::get_f64(in);
      if (i + j >= 0) f.cells_[f.row_offset(i) + static_cast<std::size_t>(j + n)] = v;
    }
  for (int i = 1 - n; i <= n; ++i) f.seeds_[static_cast<std::size_t>(i - f.seed_index_min())] = detail::get_f64(in);
  return f;
}

}  // namespace kgqv
