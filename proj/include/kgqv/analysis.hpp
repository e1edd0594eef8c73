#pragma once

// Statistics of marched fields: local-linearization remainders, Monte Carlo
// L^p norms, quadratic variation on the unit square and the diffusion estimator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgqv/coords.hpp"
#include "kgqv/diffusion.hpp"
#include "kgqv/errors.hpp"
#include "kgqv/field.hpp"
#include "kgqv/noise.hpp"
#include "kgqv/parallel.hpp"
#include "kgqv/solver.hpp"
#include "kgqv/stats.hpp"

namespace kgqv {

// ---------------------------------------------------------------- remainders

struct RemainderSample {
  double eps = 0.0;
  RotPoint point;
  Sign sign = Sign::plus;
  double value = 0.0;
};

namespace detail {

inline void require_coupled(const FieldSample& v, const FieldSample& V) {
  if (!(v.grid() == V.grid())) throw CouplingError("remainder needs v and V on the same window");
  if (v.noise_seed() != V.noise_seed()) throw CouplingError("remainder needs v and V from the same noise field");
}

}  // namespace detail

/// delta1_{+-eps} delta2_{eps} v(q) - F(v(q)) delta1_{+-eps} delta2_{eps} V(q).
inline double remainder(const FieldSample& v, const FieldSample& V, const DiffusionCoefficient& F, RotPoint q,
                        double eps, Sign sign) {
  detail::require_coupled(v, V);
  const auto [i, j] = v.grid().index_of(q);
  const int k = v.grid().steps(eps);
  const double dv = v.second_difference(i, j, k, sign);
  const double dV = V.second_difference(i, j, k, sign);
  return dv - F(v.at(i, j)) * dV;
}

inline RemainderSample remainder_sample(const FieldSample& v, const FieldSample& V, const DiffusionCoefficient& F,
                                        RotPoint q, double eps, Sign sign) {
  return {eps, q, sign, remainder(v, V, F, q, eps, sign)};
}

/// Same remainder for the physical-coordinate increments at (t, x) with step
/// eps; the stencil is read off the rotated lattice (spacing sqrt2 eps).
inline double remainder_original(const FieldSample& v, const FieldSample& V, const DiffusionCoefficient& F,
                                 PhysPoint p, double eps, Stencil stencil) {
  detail::require_coupled(v, V);
  const auto fv = [&v](PhysPoint x) { return v.value_at(x); };
  const auto fV = [&V](PhysPoint x) { return V.value_at(x); };
  return original_coord_diff(fv, p, eps, stencil) - F(v.value_at(p)) * original_coord_diff(fV, p, eps, stencil);
}

// ------------------------------------------------------------ Monte Carlo norms

struct LpEstimate {
  double estimate = 0.0;
  double se = 0.0;
};

inline constexpr std::size_t kMinReplications = 100;

/// ((1/R) sum |x_r|^p)^{1/p} with a delta-method standard error.
inline LpEstimate lp_norm(std::span<const double> x, double p) {
  if (!(p > 0.0)) throw DomainError("exponent p must be positive");
  if (x.size() < kMinReplications)
    throw ConfigurationError("L^p estimate needs at least " + std::to_string(kMinReplications) + " replications");
  std::vector<double> pw(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k])) throw NumericFailure("non-finite sample at replication " + std::to_string(k));
    pw[k] = p == 2.0 ? x[k] * x[k] : std::pow(std::abs(x[k]), p);
  }
  const double m = mean(pw);
  const double m_se = standard_error(pw);
  if (m == 0.0) return {0.0, 0.0};
  const double est = std::pow(m, 1.0 / p);
  return {est, est / (p * m) * m_se};
}

using Sampler = std::function<double(std::uint64_t replication)>;

/// Draws sampler(0..R-1), possibly across threads; the sampler must be pure in
/// its argument.
inline LpEstimate lp_norm_mc(const Sampler& sampler, double p, std::size_t replications, int jobs = 1) {
  if (replications < kMinReplications)
    throw ConfigurationError("L^p estimate needs at least " + std::to_string(kMinReplications) + " replications");
  const auto xs = replicate<double>(
      replications, jobs, [] { return 0; }, [&](int&, std::size_t r) { return sampler(r); });
  return lp_norm(xs, p);
}

/// L^2 norm of X with control variate Y of known second moment:
/// sqrt(mean(X^2 - Y^2) + E[Y^2]).
inline LpEstimate l2_norm_controlled(std::span<const double> x, std::span<const double> y, double y_second_moment) {
  if (x.size() != y.size()) throw DomainError("control variate sample differs in length");
  if (x.size() < kMinReplications)
    throw ConfigurationError("L^2 estimate needs at least " + std::to_string(kMinReplications) + " replications");
  std::vector<double> d(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(y[k]))
      throw NumericFailure("non-finite sample at replication " + std::to_string(k));
    d[k] = x[k] * x[k] - y[k] * y[k];
  }
  const double m = mean(d) + y_second_moment;
  if (!(m > 0.0)) throw NumericFailure("controlled second moment is not positive");
  const double est = std::sqrt(m);
  return {est, standard_error(d) / (2.0 * est)};
}

// ---------------------------------------------------------- quadratic variation

namespace detail {

/// Lattice stride for an N x N partition of [0,1]^2 and a window check.
inline int unit_square_stride(const FieldSample& field, int N) {
  const RotatedGrid& g = field.grid();
  if (N < 1 || g.n() % N != 0)
    throw DomainError("partition size " + std::to_string(N) + " does not divide the resolution " +
                      std::to_string(g.n()));
  if (g.i_max() < g.n() || g.j_max() < g.n()) throw DomainError("field window does not cover [0,1]^2");
  return g.n() / N;
}

}  // namespace detail

/// Q_N = sum over i, j < N of the squared rectangular increment on the N x N partition.
inline double quad_var(const FieldSample& field, int N) {
  const int k = detail::unit_square_stride(field, N);
  double q = 0.0;
  for (int a = 0; a < N; ++a) {
    const int i0 = a * k, i1 = i0 + k;
    for (int b = 0; b < N; ++b) {
      const int j0 = b * k, j1 = j0 + k;
      const double d = (field(i1, j1) - field(i1, j0)) - (field(i0, j1) - field(i0, j0));
      q += d * d;
    }
  }
  return q;
}

inline double quad_var(const FieldSample& field) { return quad_var(field, field.grid().n()); }

namespace detail {

inline double sum_f_squared(const FieldSample& field, const DiffusionCoefficient& F, int N) {
  const int k = unit_square_stride(field, N);
  double s = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const double f = F(field(a * k, b * k));
      s += f * f;
    }
  return s;
}

}  // namespace detail

/// Left-endpoint Riemann sum of F^2(v)/4 over [0,1]^2.
inline double limit_functional(const FieldSample& field, const DiffusionCoefficient& F, int N) {
  return 0.25 * detail::sum_f_squared(field, F, N) / (static_cast<double>(N) * N);
}

inline double limit_functional(const FieldSample& field, const DiffusionCoefficient& F) {
  return limit_functional(field, F, field.grid().n());
}

struct QuadVarReport {
  int n = 0;
  double q_n = 0.0;
  double limit_value = 0.0;
  double abs_error = 0.0;
};

inline QuadVarReport quad_var_report(const FieldSample& field, const DiffusionCoefficient& F, int N) {
  QuadVarReport r;
  r.n = N;
  r.q_n = quad_var(field, N);
  r.limit_value = limit_functional(field, F, N);
  r.abs_error = std::abs(r.q_n - r.limit_value);
  return r;
}

/// sqrt(4 N^2 Q_N / sum F^2(v)).
inline double estimate_theta(const FieldSample& field, const DiffusionCoefficient& F, int N) {
  const double denom = detail::sum_f_squared(field, F, N);
  if (!(denom > 0.0)) throw DegenerateCoefficientError("F vanishes on every sampled lattice point");
  return std::sqrt(4.0 * static_cast<double>(N) * N * quad_var(field, N) / denom);
}

inline double estimate_theta(const FieldSample& field, const DiffusionCoefficient& F) {
  return estimate_theta(field, F, field.grid().n());
}

// ------------------------------------------------------ linear increment norm

struct IncrementOptions {
  int n = 256;             ///< lattice resolution; every eps must be a multiple of 1/n
  std::uint64_t seed = 1;  ///< replication r uses seed + r
  int jobs = 1;
  Sign sign = Sign::plus;
};

struct IncrementSweep {
  std::vector<double> eps;
  std::vector<LpEstimate> plain;       ///< ||delta delta V||_2
  std::vector<LpEstimate> controlled;  ///< same, with the undamped massless field as control variate
};

/// Monte Carlo ||delta1 delta2 V||_2 at q for every eps in one pass: each
/// replication marches V once and evaluates all stencils on that path. The
/// control variate is the same rectangle increment of the a = m = 0 field on
/// the same noise, which is half the noise mass of the rectangle and so has
/// second moment exactly eps^2/4.
inline IncrementSweep linear_increment_sweep(const PhysParams& params, std::span<const double> eps, RotPoint q,
                                             std::size_t replications, const IncrementOptions& opt = {}) {
  if (eps.empty()) throw ConfigurationError("empty eps list");
  double eps_max = 0.0;
  for (double e : eps) eps_max = std::max(eps_max, e);
  const double tau_hi = q.tau + (opt.sign == Sign::plus ? eps_max : 0.0);
  const RotatedGrid grid = RotatedGrid::covering(opt.n, tau_hi, q.lambda + eps_max);
  const auto [qi, qj] = grid.index_of(q);
  std::vector<int> steps;
  for (double e : eps) steps.push_back(grid.steps(e));
  if (!grid.contains(qi + as_int(opt.sign) * *std::max_element(steps.begin(), steps.end()), qj))
    throw DomainError("increment stencil leaves the half-plane i + j >= 0");

  const std::size_t ne = eps.size();
  struct Work {
    NoiseField noise;
    FieldSample V;
  };
  std::vector<double> xs(replications * ne), ys(replications * ne);
  parallel_for(
      replications, opt.jobs,
      [&] { return Work{NoiseField::zeros(grid), FieldSample(grid, linear_params(params), FieldKind::linear)}; },
      [&](Work& w, std::size_t r) {
        w.noise.regenerate(opt.seed + r);
        march_linear_into(w.V, params, w.noise);
        for (std::size_t e = 0; e < ne; ++e) {
          const int k = steps[e];
          const int i0 = opt.sign == Sign::plus ? qi : qi - k;
          double mass = 0.0;
          for (int i = i0; i < i0 + k; ++i)
            for (int j = qj; j < qj + k; ++j) mass += w.noise.cell_unchecked(i, j);
          xs[e * replications + r] = w.V.second_difference(qi, qj, k, opt.sign);
          ys[e * replications + r] = 0.5 * as_double(opt.sign) * mass;
        }
      });

  IncrementSweep out;
  out.eps.assign(eps.begin(), eps.end());
  for (std::size_t e = 0; e < ne; ++e) {
    const std::span<const double> x(xs.data() + e * replications, replications);
    const std::span<const double> y(ys.data() + e * replications, replications);
    out.plain.push_back(lp_norm(x, 2.0));
    out.controlled.push_back(l2_norm_controlled(x, y, eps[e] * eps[e] / 4.0));
  }
  return out;
}

/// Plain Monte Carlo ||delta1 delta2 V||_2 at one eps.
inline LpEstimate linear_increment_l2(const PhysParams& params, double eps, RotPoint q, std::size_t replications,
                                      const IncrementOptions& opt = {}) {
  const double e[] = {eps};
  return linear_increment_sweep(params, e, q, replications, opt).plain.front();
}

}  // namespace kgqv
