#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., Random123) and the
// Gaussian block built on it. Output is a pure function of (counter, key), so
// any lattice increment can be regenerated independently of evaluation order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace kgqv::rng {

using Counter = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

namespace detail {

inline constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) noexcept {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace detail

inline Counter philox4x64(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += detail::kWeyl0;
      key[1] += detail::kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    detail::mulhilo(detail::kMul0, ctr[0], hi0, lo0);
    detail::mulhilo(detail::kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// 53-bit uniform in (0, 1].
inline double to_open_unit(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Four independent standard normals from one Philox block (two Box-Muller pairs).
inline std::array<double, 4> normal_block(const Counter& ctr, const Key& key) noexcept {
  const Counter r = philox4x64(ctr, key);
  std::array<double, 4> z;
  for (int k = 0; k < 2; ++k) {
    const double radius = std::sqrt(-2.0 * std::log(to_open_unit(r[2 * k])));
    const double angle = 2.0 * std::numbers::pi * to_open_unit(r[2 * k + 1]);
    z[2 * k] = radius * std::cos(angle);
    z[2 * k + 1] = radius * std::sin(angle);
  }
  return z;
}

}  // namespace kgqv::rng
