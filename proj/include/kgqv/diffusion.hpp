#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "kgqv/errors.hpp"

namespace kgqv {

enum class DiffusionId { constant_one, affine, shifted_sine, clipped_linear };

inline std::string_view to_string(DiffusionId id) noexcept {
  switch (id) {
    case DiffusionId::constant_one: return "constant_one";
    case DiffusionId::affine: return "affine";
    case DiffusionId::shifted_sine: return "shifted_sine";
    case DiffusionId::clipped_linear: return "clipped_linear";
  }
  return "unknown";
}

inline std::optional<DiffusionId> parse_diffusion_id(std::string_view name) noexcept {
  for (auto id : {DiffusionId::constant_one, DiffusionId::affine, DiffusionId::shifted_sine,
                  DiffusionId::clipped_linear})
    if (name == to_string(id)) return id;
  return std::nullopt;
}

/// Globally Lipschitz diffusion coefficient F from a fixed menu:
///   constant_one    F(u) = 1
///   affine          F(u) = alpha + beta u                  (defaults 1, 0.5)
///   shifted_sine    F(u) = c0 + c1 sin(u)                  (defaults 2, 1)
///   clipped_linear  F(u) = clamp(u, -M0, M0) + c2          (defaults 1, 2)
class DiffusionCoefficient {
 public:
  DiffusionCoefficient() = default;

  static DiffusionCoefficient make(DiffusionId id, std::span<const double> params = {}) {
    DiffusionCoefficient f;
    f.id_ = id;
    switch (id) {
      case DiffusionId::constant_one:
        if (!params.empty()) throw ConfigurationError("constant_one takes no parameters");
        return f;
      case DiffusionId::affine: f.p_ = {1.0, 0.5}; break;
      case DiffusionId::shifted_sine: f.p_ = {2.0, 1.0}; break;
      case DiffusionId::clipped_linear: f.p_ = {1.0, 2.0}; break;
    }
    if (!params.empty()) {
      if (params.size() != 2)
        throw ConfigurationError(std::string(to_string(id)) + " takes exactly 2 parameters");
      f.p_ = {params[0], params[1]};
    }
    if (id == DiffusionId::clipped_linear && !(f.p_[0] >= 0.0))
      throw ConfigurationError("clipped_linear needs a non-negative clip level");
    return f;
  }

  static DiffusionCoefficient constant_one() { return make(DiffusionId::constant_one); }
  static DiffusionCoefficient constant(double c) {
    const double p[] = {c, 0.0};
    return make(DiffusionId::affine, p);
  }
  static DiffusionCoefficient affine(double alpha, double beta) {
    const double p[] = {alpha, beta};
    return make(DiffusionId::affine, p);
  }
  static DiffusionCoefficient shifted_sine(double c0 = 2.0, double c1 = 1.0) {
    const double p[] = {c0, c1};
    return make(DiffusionId::shifted_sine, p);
  }
  static DiffusionCoefficient clipped_linear(double clip = 1.0, double shift = 2.0) {
    const double p[] = {clip, shift};
    return make(DiffusionId::clipped_linear, p);
  }

  double operator()(double u) const noexcept {
    switch (id_) {
      case DiffusionId::constant_one: return 1.0;
      case DiffusionId::affine: return p_[0] + p_[1] * u;
      case DiffusionId::shifted_sine: return p_[0] + p_[1] * std::sin(u);
      case DiffusionId::clipped_linear: return std::clamp(u, -p_[0], p_[0]) + p_[1];
    }
    return 0.0;
  }

  /// Smallest global Lipschitz constant of the menu entry.
  double lipschitz_constant() const noexcept {
    switch (id_) {
      case DiffusionId::constant_one: return 0.0;
      case DiffusionId::affine:
      case DiffusionId::shifted_sine: return std::abs(p_[1]);
      case DiffusionId::clipped_linear: return p_[0] > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
  }

  DiffusionId id() const noexcept { return id_; }
  std::span<const double> params() const noexcept {
    return id_ == DiffusionId::constant_one ? std::span<const double>{} : std::span<const double>{p_};
  }

  /// True when F is the constant 1, i.e. the equation is linear with unit noise.
  bool is_unit() const noexcept {
    return id_ == DiffusionId::constant_one ||
           (id_ == DiffusionId::affine && p_[0] == 1.0 && p_[1] == 0.0);
  }

 private:
  DiffusionId id_ = DiffusionId::constant_one;
  std::array<double, 2> p_{0.0, 0.0};
};

}  // namespace kgqv
