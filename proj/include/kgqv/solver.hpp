#pragma once

// Characteristic-grid scheme on the rotated lattice and a brute-force Picard
// oracle for the discretized mild equation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kgqv/coords.hpp"
#include "kgqv/diffusion.hpp"
#include "kgqv/errors.hpp"
#include "kgqv/field.hpp"
#include "kgqv/greens.hpp"
#include "kgqv/noise.hpp"

namespace kgqv {

struct DriftCoefficient {
  double coefficient = 0.0;

  static DriftCoefficient from(const PhysParams& p) noexcept { return {p.drift_coefficient()}; }
  double operator()(double u) const noexcept { return coefficient * u; }
};

/// Kernel decay over one rotated step: e^{-a eps/(2 sqrt2)}.
inline double step_decay(double a, double eps) noexcept { return std::exp(-a * eps / (2.0 * kSqrt2)); }

namespace detail {

inline void require_noise(const NoiseField& noise) {
  if (noise.empty()) throw ConfigurationError("no noise field supplied");
}

inline void require_same_window(const FieldSample& out, const NoiseField& noise) {
  if (!(out.grid() == noise.grid())) throw ConfigurationError("field and noise windows differ");
}

/// Shared marching loop. `with_drift` = false drops the drift term; a non-null
/// `driver` supplies the field at which F is evaluated (the critical part uses
/// the full solution there).
inline void march_kernel(FieldSample& v, const PhysParams& params, const DiffusionCoefficient& F,
                         const NoiseField& noise, bool with_drift, const FieldSample* driver = nullptr) {
  const FieldSample& u = driver ? *driver : v;
  const RotatedGrid& g = noise.grid();
  const double h = g.eps();
  const double beta = step_decay(params.a, h);
  const double beta2 = beta * beta;
  const double half_theta = 0.5 * params.theta;
  const double half_drift = with_drift ? 0.5 * params.drift_coefficient() * h * h : 0.0;
  const double seed_scale = half_theta * F(0.0);

  // Row-major sweep is a topological order: (i, j) needs (i, j-1), (i-1, j), (i-1, j-1).
  for (int i = g.i_min(); i <= g.i_max(); ++i) {
    for (int j = std::max(g.j_min(), -i); j <= g.j_max(); ++j) {
      const int s = i + j;
      if (s == 0) {
        v(i, j) = 0.0;
      } else if (s == 1) {
        v(i, j) = seed_scale * noise.seed_unchecked(i);
      } else {
        const double vb = v(i - 1, j - 1);
        v(i, j) = beta * v(i, j - 1) + beta * v(i - 1, j) - beta2 * vb +
                  half_theta * F(u(i - 1, j - 1)) * noise.cell_unchecked(i - 1, j - 1) + half_drift * vb;
      }
    }
  }
}

}  // namespace detail

/// March into an existing field on the noise grid (reuses its storage).
inline void march_into(FieldSample& out, const PhysParams& params, const DiffusionCoefficient& F,
                       const NoiseField& noise, FieldKind kind = FieldKind::nonlinear) {
  params.validate();
  detail::require_noise(noise);
  detail::require_same_window(out, noise);
  out.reset(params, kind, noise.master_seed());
  detail::march_kernel(out, params, F, noise, true);
}

inline FieldSample march(const PhysParams& params, const DiffusionCoefficient& F, const NoiseField& noise) {
  detail::require_noise(noise);
  FieldSample v(noise.grid(), params, FieldKind::nonlinear, noise.master_seed());
  march_into(v, params, F, noise, FieldKind::nonlinear);
  return v;
}

inline PhysParams linear_params(PhysParams params) noexcept {
  params.theta = 1.0;
  params.diffusion = DiffusionId::constant_one;
  return params;
}

inline void march_linear_into(FieldSample& out, const PhysParams& params, const NoiseField& noise) {
  march_into(out, linear_params(params), DiffusionCoefficient::constant_one(), noise, FieldKind::linear);
}

inline FieldSample march_linear(const PhysParams& params, const NoiseField& noise) {
  detail::require_noise(noise);
  FieldSample V(noise.grid(), linear_params(params), FieldKind::linear, noise.master_seed());
  march_linear_into(V, params, noise);
  return V;
}

struct SplitFields {
  FieldSample drift_part;     ///< v_L
  FieldSample critical_part;  ///< v_C
};

/// Cone quadrature of the drift against an already-marched field v:
///   v_L(P) = sum over cells c in the cone of P of Gamma(t_P - t_c, .) b(v(bottom c)) eps^2,
/// with t_c the time of the cell's top vertex. That node makes v_L + v_C
/// reproduce the marched v up to rounding. Accumulated as a 2-D prefix sum of
/// beta^{-(index sum)} weighted drifts.
inline FieldSample drift_quadrature(const FieldSample& v) {
  const RotatedGrid& g = v.grid();
  const PhysParams& params = v.params();
  const DriftCoefficient b = DriftCoefficient::from(params);
  const double h = g.eps();
  const double beta = step_decay(params.a, h);
  const double log_beta = -params.a * h / (2.0 * kSqrt2);

  FieldSample out(g, params, FieldKind::drift_part, v.noise_seed());
  FieldSample prefix(g, params, FieldKind::drift_part, v.noise_seed());
  for (int i = g.i_min(); i <= g.i_max(); ++i) {
    for (int j = std::max(g.j_min(), -i); j <= g.j_max(); ++j) {
      const int s = i + j;
      if (s <= 1) {
        prefix(i, j) = 0.0;
        out(i, j) = 0.0;
        continue;
      }
      const int ci = i - 1, cj = j - 1;
      const double cell = b(v(ci, cj)) * std::exp(-log_beta * (ci + cj));
      const double lower = (ci + cj >= 1) ? prefix(ci, cj) : 0.0;
      const double left = (s - 1 >= 2) ? prefix(i, j - 1) : 0.0;
      const double right = (s - 1 >= 2) ? prefix(i - 1, j) : 0.0;
      prefix(i, j) = left + right - lower + cell;
      out(i, j) = 0.5 * h * h * std::pow(beta, s - 2) * prefix(i, j);
    }
  }
  return out;
}

inline SplitFields march_split(const PhysParams& params, const DiffusionCoefficient& F, const NoiseField& noise) {
  params.validate();
  detail::require_noise(noise);
  const FieldSample v = march(params, F, noise);
  FieldSample vc(noise.grid(), params, FieldKind::critical_part, noise.master_seed());
  detail::march_kernel(vc, params, F, noise, false, &v);
  return {drift_quadrature(v), std::move(vc)};
}

struct PicardResult {
  FieldSample field;
  std::vector<double> differences;  ///< sup |u_{k+1} - u_k| for k = 0..K-1
};

inline constexpr int kPicardMaxResolution = 16;
inline constexpr int kPicardMinIterations = 8;

/// Fixed-point iteration of the discretized mild equation. Every cell
/// contributes Gamma at its centre times [b(u(bottom)) eps^2 + theta F(u(bottom)) dW];
/// every layer-1 triangle contributes Gamma at its centroid times theta F(0) dW.
/// The kernel is evaluated in physical coordinates and decides cone membership.
inline PicardResult picard_oracle_trace(const PhysParams& params, const DiffusionCoefficient& F,
                                        const NoiseField& noise, int iterations) {
  params.validate();
  detail::require_noise(noise);
  const RotatedGrid& g = noise.grid();
  if (g.n() > kPicardMaxResolution)
    throw ConfigurationError("Picard oracle supports n <= " + std::to_string(kPicardMaxResolution));
  if (iterations < kPicardMinIterations)
    throw ConfigurationError("Picard oracle needs at least " + std::to_string(kPicardMinIterations) + " iterations");

  const double h = g.eps();
  const DriftCoefficient b = DriftCoefficient::from(params);

  struct Source {
    double t, x;
    int bi, bj;  // bottom vertex for cells; bi == kTriangle marks a triangle
    double dw;
  };
  constexpr int kTriangle = -(1 << 30);
  std::vector<Source> sources;
  for (int i = g.i_min(); i < g.i_max(); ++i)
    for (int j = std::max(g.j_min(), -i); j < g.j_max(); ++j) {
      const PhysPoint c = to_physical(RotPoint{(i + 0.5) * h, (j + 0.5) * h});
      sources.push_back({c.t, c.x, i, j, noise.cell_unchecked(i, j)});
    }
  for (int i = noise.seed_index_min(); i <= noise.seed_index_max(); ++i) {
    // Triangle with vertices (i, 1-i), (i, -i), (i-1, 1-i).
    const PhysPoint c = to_physical(RotPoint{(i - 1.0 / 3.0) * h, (2.0 / 3.0 - i) * h});
    sources.push_back({c.t, c.x, kTriangle, 0, noise.seed_unchecked(i)});
  }

  struct Target {
    int i, j;
    double t, x;
  };
  std::vector<Target> targets;
  for (int i = g.i_min(); i <= g.i_max(); ++i)
    for (int j = std::max(g.j_min(), -i); j <= g.j_max(); ++j) {
      const PhysPoint p = to_physical(g.point(i, j));
      targets.push_back({i, j, p.t, p.x});
    }

  FieldSample u(g, params, FieldKind::oracle, noise.master_seed());
  u.fill([](int, int) { return 0.0; });
  FieldSample next = u;
  const double f0 = F(0.0);
  std::vector<double> diffs;
  diffs.reserve(static_cast<std::size_t>(iterations));
  int growth_run = 0;

  for (int k = 0; k < iterations; ++k) {
    double sup = 0.0;
    for (const Target& P : targets) {
      double acc = 0.0;
      for (const Source& s : sources) {
        const double gamma = critical_kernel(params.a, P.t - s.t, P.x - s.x);
        if (gamma == 0.0) continue;
        if (s.bi == kTriangle) {
          acc += gamma * params.theta * f0 * s.dw;
        } else {
          const double ub = u(s.bi, s.bj);
          acc += gamma * (b(ub) * h * h + params.theta * F(ub) * s.dw);
        }
      }
      next(P.i, P.j) = acc;
      sup = std::max(sup, std::abs(acc - u(P.i, P.j)));
    }
    if (!std::isfinite(sup)) throw OracleFailure("Picard iterate became non-finite at step " + std::to_string(k + 1));
    if (!diffs.empty() && sup > diffs.back()) {
      if (++growth_run >= 3 && k >= 4)
        throw OracleFailure("Picard differences grew three times in a row by step " + std::to_string(k + 1));
    } else {
      growth_run = 0;
    }
    diffs.push_back(sup);
    std::swap(u, next);
  }
  return {std::move(u), std::move(diffs)};
}

inline FieldSample picard_oracle(const PhysParams& params, const DiffusionCoefficient& F, const NoiseField& noise,
                                 int iterations) {
  return picard_oracle_trace(params, F, noise, iterations).field;
}

/// Largest |a - b| over the common window; grids must match.
inline double sup_difference(const FieldSample& a, const FieldSample& b) {
  if (!(a.grid() == b.grid())) throw ConfigurationError("fields live on different windows");
  const RotatedGrid& g = a.grid();
  double sup = 0.0;
  for (int i = g.i_min(); i <= g.i_max(); ++i)
    for (int j = std::max(g.j_min(), -i); j <= g.j_max(); ++j) {
      const double d = std::abs(a(i, j) - b(i, j));
      if (!std::isfinite(d)) throw NumericFailure("non-finite field value at (" + std::to_string(i) + ", " +
                                                  std::to_string(j) + ")");
      sup = std::max(sup, d);
    }
  return sup;
}

}  // namespace kgqv
