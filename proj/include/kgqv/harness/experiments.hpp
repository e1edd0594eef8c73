#pragma once

// The seven experiments. Each composes solver and analysis, fills a report
// and derives its checks from the computed values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "kgqv/analysis.hpp"
#include "kgqv/coords.hpp"
#include "kgqv/greens.hpp"
#include "kgqv/harness/config.hpp"
#include "kgqv/harness/report.hpp"
#include "kgqv/noise.hpp"
#include "kgqv/parallel.hpp"
#include "kgqv/philox.hpp"
#include "kgqv/solver.hpp"
#include "kgqv/stats.hpp"

namespace kgqv::harness {

struct RunOptions {
  bool progress = false;  ///< short status lines on stderr
};

// Calibrated bounds for the scheme/oracle comparison: the median over seeds of
// the sup-norm difference must stay below kOracleScale * sqrt(1/n). Measured
// medians with the default parameters are 0.10, 0.055, 0.037 at n = 4, 8, 16.
inline constexpr double kOracleScale = 0.25;
// Undamped massless linear case: scheme and oracle coincide up to rounding.
inline constexpr double kOracleLinearTolerance = 10.0;  // in units of eps^2
inline constexpr double kOracleContraction = 0.5;

inline constexpr double kUnbounded = std::numeric_limits<double>::max();

namespace detail {

inline void progress(const RunOptions& opt, const std::string& msg) {
  if (opt.progress) std::fprintf(stderr, "[kgqv] %s\n", msg.c_str());
}

inline int effective_jobs(const ResolvedConfig& cfg) { return cfg.jobs > 0 ? cfg.jobs : default_jobs(); }

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string point_label(RotPoint q) { return "(" + fmt(q.tau) + "," + fmt(q.lambda) + ")"; }

/// Rate check on positive deviations. When every deviation is below `floor`
/// the quantity is exact and the check is on the largest deviation instead.
inline void rate_check(ExperimentReport& rep, const std::string& name, const std::vector<double>& x,
                       const std::vector<double>& dev, double lo, double hi, double floor) {
  const double worst = *std::max_element(dev.begin(), dev.end());
  if (worst <= floor) {
    rep.checks.push_back(within(name + " exact", worst, 0.0, floor, "deviation at rounding level at every eps"));
    return;
  }
  const LinearFit fit = loglog_fit(x, dev);
  rep.fits.push_back({name, fit});
  rep.checks.push_back(within(name, fit.slope, lo, hi, "slope_se=" + fmt(fit.slope_se)));
}

inline double uniform(std::uint64_t seed, std::uint64_t k, int lane) {
  const auto r = rng::philox4x64({k, 0, 0x67726e, 0}, {seed, 0});
  return rng::to_open_unit(r[static_cast<std::size_t>(lane)]);
}

}  // namespace detail

// ------------------------------------------------------------- green identities

inline void run_green_identities(const ResolvedConfig& cfg, ExperimentReport& rep, const RunOptions& opt) {
  detail::progress(opt, "green_identities: 1000 parameter points");
  constexpr int kPoints = 1000;
  const char* names[] = {"generic", "generic", "boundary_above", "boundary_below", "critical"};
  double worst[5] = {0, 0, 0, 0, 0};
  double ic_value = 0.0, ic_velocity = 0.0;

  for (int k = 0; k < kPoints; ++k) {
    const int cat = k % 5;
    auto u = [&](int lane) { return detail::uniform(cfg.seed, static_cast<std::uint64_t>(k), lane); };
    double a = 0, m = 0, t = 4.0 * u(2), xi = 0;
    if (cat <= 1) {
      a = -3.0 + 6.0 * u(0);
      m = 2.0 * u(1);
      xi = 6.0 * u(3);
    } else if (cat == 4) {
      a = -3.0 + 6.0 * u(0);
      m = std::abs(a) / 2.0;
    } else {
      a = (u(0) < 0.5 ? -1.0 : 1.0) * (0.5 + 2.5 * u(1));
      const double delta = std::pow(10.0, -14.0 + 12.0 * u(3)) * (cat == 2 ? 1.0 : -1.0);
      if (k % 2 == 0) {
        m = std::abs(a) / 4.0 * u(1);
        xi = std::sqrt(a * a / 4.0 - m * m + delta);
      } else {
        m = std::sqrt(a * a / 4.0 + delta);
      }
    }
    const double gb = fourier_green_branch(a, m, t, xi);
    const double gu = fourier_green_unified(a, m, t, xi);
    const double rel = std::abs(gb - gu) / (1.0 + std::abs(gb));
    worst[cat] = std::max(worst[cat], rel);

    // Initial data: FG(0) = 0 and d/dt FG(0) = 1 (second-order one-sided difference).
    constexpr double h = 1e-5;
    for (auto g : {&fourier_green_branch, &fourier_green_unified}) {
      ic_value = std::max(ic_value, std::abs((*g)(a, m, 0.0, xi)));
      const double d = (-3.0 * (*g)(a, m, 0.0, xi) + 4.0 * (*g)(a, m, h, xi) - (*g)(a, m, 2.0 * h, xi)) / (2.0 * h);
      ic_velocity = std::max(ic_velocity, std::abs(d - 1.0));
    }
  }
  double overall = 0.0;
  for (int c = 0; c < 5; ++c) {
    if (c == 1) continue;
    const double v = c == 0 ? std::max(worst[0], worst[1]) : worst[c];
    rep.rows.push_back({std::string("max_diff_branch_vs_unified ") + names[c], static_cast<double>(c), v, 0.0});
    overall = std::max(overall, v);
  }
  rep.rows.push_back({"max_abs_initial_value", 0.0, ic_value, 0.0});
  rep.rows.push_back({"max_abs_initial_velocity_error", 0.0, ic_velocity, 0.0});
  rep.checks.push_back(within("branch vs unified |diff|/(1+|value|)", overall, 0.0, 1e-10));
  rep.checks.push_back(within("FG(0,xi) = 0", ic_value, 0.0, 1e-6));
  rep.checks.push_back(within("d/dt FG(0,xi) = 1", ic_velocity, 0.0, 1e-6));
}

// ---------------------------------------------------------------- kernel lemma

inline void run_kernel_lemma(const ResolvedConfig& cfg, ExperimentReport& rep, const RunOptions& opt) {
  std::vector<double> eps = cfg.eps;
  std::sort(eps.begin(), eps.end());
  const double eps_min = eps.front();
  for (double a : {0.0, 1.0, 2.0}) {
    for (double p : {1.0, 2.0}) {
      const std::string tag = "a=" + detail::fmt(a) + " p=" + detail::fmt(p);
      detail::progress(opt, "kernel_lemma: " + tag);
      const double target = std::pow(2.0, -p);
      std::vector<double> dev;
      double ratio_at_min = 0.0;
      for (double e : eps) {
        const double ratio = kernel_second_difference_lp(a, p, 1.0, 0.0, e) / (e * e);
        rep.rows.push_back({"ratio " + tag, e, ratio, 0.0});
        dev.push_back(std::abs(ratio - target));
        if (e == eps_min) ratio_at_min = ratio;
      }
      rep.checks.push_back(within("ratio/2^-p at eps=" + detail::fmt(eps_min) + " " + tag, ratio_at_min / target,
                                  0.95, 1.05));
      detail::rate_check(rep, "deviation slope " + tag, eps, dev, 0.9, kUnbounded, 1e-10 * target);
    }
  }
}

// ------------------------------------------------------------- linear variance

inline void run_linear_variance(const ResolvedConfig& cfg, ExperimentReport& rep, const RunOptions& opt) {
  const RotPoint q{0.5, 0.5};
  detail::progress(opt, "linear_variance: " + std::to_string(cfg.reps) + " replications at n=" +
                            std::to_string(cfg.n));
  IncrementOptions io;
  io.n = cfg.n;
  io.seed = cfg.seed;
  io.jobs = detail::effective_jobs(cfg);
  const IncrementSweep s = linear_increment_sweep(cfg.params, cfg.eps, q, cfg.reps, io);

  std::vector<double> dev;
  std::size_t k_min = 0;
  for (std::size_t k = 0; k < s.eps.size(); ++k) {
    const double e = s.eps[k], half = e / 2.0;
    rep.rows.push_back({"l2_plain", e, s.plain[k].estimate, s.plain[k].se});
    rep.rows.push_back({"l2_controlled", e, s.controlled[k].estimate, s.controlled[k].se});
    rep.rows.push_back({"ratio_plain", e, s.plain[k].estimate / half, s.plain[k].se / half});
    rep.rows.push_back({"abs_deviation", e, std::abs(s.controlled[k].estimate - half), s.controlled[k].se});
    dev.push_back(std::abs(s.controlled[k].estimate - half));
    if (e < s.eps[k_min]) k_min = k;
  }
  const double e0 = s.eps[k_min];
  rep.checks.push_back(within("ratio to eps/2 at eps=" + detail::fmt(e0), s.plain[k_min].estimate / (e0 / 2.0), 0.98,
                              1.02, "plain estimator, se=" + detail::fmt(s.plain[k_min].se / (e0 / 2.0))));
  detail::rate_check(rep, "deviation slope", s.eps, dev, 1.4, kUnbounded, 1e-12 * e0);
}

// -------------------------------------------------------------- remainder rate

inline const std::vector<RotPoint>& remainder_points() {
  static const std::vector<RotPoint> pts = {{0.25, 0.25}, {0.5, 0.5}, {0.75, 0.25}};
  return pts;
}

inline void run_remainder_rate(const ResolvedConfig& cfg, ExperimentReport& rep, const RunOptions& opt) {
  const auto& pts = remainder_points();
  const DiffusionCoefficient F = cfg.diffusion();
  const double e_max = *std::max_element(cfg.eps.begin(), cfg.eps.end());
  double tau_hi = 0.0, lam_hi = 0.0;
  for (auto q : pts) {
    tau_hi = std::max(tau_hi, q.tau + e_max);
    lam_hi = std::max(lam_hi, q.lambda + e_max);
  }
  const RotatedGrid grid = RotatedGrid::covering(cfg.n, tau_hi, lam_hi);
  for (auto q : pts)
    if (!grid.contains(grid.index_of(q).first - grid.steps(e_max), grid.index_of(q).second))
      throw UsageError("eps", "stencil at " + detail::point_label(q) + " crosses the initial line");

  // Series: per point, R+, R-, then the two physical-coordinate increments.
  struct Series {
    std::string label;
    RotPoint q;
    int kind;  // 0: R+, 1: R-, 2: first, 3: second
  };
  std::vector<Series> series;
  for (auto q : pts) {
    const PhysPoint p = to_physical(q);
    const std::string pl = detail::point_label(q);
    const std::string ph = "(t,x)=(" + detail::fmt(p.t) + "," + detail::fmt(p.x) + ")";
    series.push_back({"rotated R+ at " + pl, q, 0});
    series.push_back({"rotated R- at " + pl, q, 1});
    series.push_back({"original D1 at " + ph, q, 2});
    series.push_back({"original D2 at " + ph, q, 3});
  }
  const std::size_t ns = series.size(), ne = cfg.eps.size(), R = cfg.reps;
  std::vector<double> xs(ns * ne * R);

  detail::progress(opt, "remainder_rate: " + std::to_string(R) + " replications on a " +
                            std::to_string(grid.extent()) + "^2 window");
  struct Work {
    NoiseField noise;
    FieldSample v, V;
  };
  const PhysParams params = cfg.params;
  parallel_for(
      R, detail::effective_jobs(cfg),
      [&] {
        return Work{NoiseField::zeros(grid), FieldSample(grid, params, FieldKind::nonlinear),
                    FieldSample(grid, linear_params(params), FieldKind::linear)};
      },
      [&](Work& w, std::size_t r) {
        w.noise.regenerate(cfg.seed + r);
        march_into(w.v, params, F, w.noise);
        march_linear_into(w.V, params, w.noise);
        for (std::size_t s = 0; s < ns; ++s)
          for (std::size_t e = 0; e < ne; ++e) {
            const double eps = cfg.eps[e];
            const Series& S = series[s];
            double val = 0.0;
            switch (S.kind) {
              case 0: val = remainder(w.v, w.V, F, S.q, eps, Sign::plus); break;
              case 1: val = remainder(w.v, w.V, F, S.q, eps, Sign::minus); break;
              case 2: val = remainder_original(w.v, w.V, F, to_physical(S.q), eps / kSqrt2, Stencil::first); break;
              default: val = remainder_original(w.v, w.V, F, to_physical(S.q), eps / kSqrt2, Stencil::second); break;
            }
            xs[(s * ne + e) * R + r] = val;
          }
      });

  for (std::size_t s = 0; s < ns; ++s) {
    const bool original = series[s].kind >= 2;
    std::vector<double> control, norm;
    for (std::size_t e = 0; e < ne; ++e) {
      const LpEstimate est = lp_norm(std::span<const double>(xs.data() + (s * ne + e) * R, R), 2.0);
      const double c = original ? cfg.eps[e] / kSqrt2 : cfg.eps[e];
      rep.rows.push_back({series[s].label, c, est.estimate, est.se});
      control.push_back(c);
      norm.push_back(est.estimate);
    }
    detail::rate_check(rep, series[s].label + " slope", control, norm, 1.35, 1.65, 0.0);
  }
}

// ------------------------------------------------------------ quadratic variation

inline double variance_se(std::span<const double> x) {
  // Standard error of the sample variance from the fourth central moment.
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
}

inline void run_quadvar_rate(const ResolvedConfig& cfg, ExperimentReport& rep, const RunOptions& opt) {
  const DiffusionCoefficient F = cfg.diffusion();
  const bool linear = F.is_unit();
  const double theta2 = cfg.params.theta * cfg.params.theta;
  std::vector<double> ns, vars, errs;

  for (int N : cfg.resolutions) {
    detail::progress(opt, "quadvar_rate: N=" + std::to_string(N));
    const RotatedGrid grid = RotatedGrid::unit_window(N);
    struct Work {
      NoiseField noise;
      FieldSample v;
    };
    std::vector<double> q(cfg.reps), err(cfg.reps);
    parallel_for(
        cfg.reps, detail::effective_jobs(cfg),
        [&] { return Work{NoiseField::zeros(grid), FieldSample(grid, cfg.params, FieldKind::nonlinear)}; },
        [&](Work& w, std::size_t r) {
          w.noise.regenerate(cfg.seed + r);
          march_into(w.v, cfg.params, F, w.noise);
          q[r] = quad_var(w.v, N);
          err[r] = std::abs(q[r] - theta2 * limit_functional(w.v, F, N));
        });
    const double mq = mean(q), se_q = standard_error(q);
    const double vq = variance(q);
    rep.rows.push_back({"mean Q_N", static_cast<double>(N), mq, se_q});
    rep.rows.push_back({"variance Q_N", static_cast<double>(N), vq, variance_se(q)});
    rep.rows.push_back({"mean abs(Q_N - limit)", static_cast<double>(N), mean(err), standard_error(err)});
    ns.push_back(N);
    vars.push_back(vq);
    errs.push_back(mean(err));
    if (linear)
      rep.checks.push_back(within("mean Q_N within 3 se of theta^2/4 at N=" + std::to_string(N),
                                  se_q > 0.0 ? std::abs(mq - theta2 / 4.0) / se_q : 0.0, 0.0, 3.0,
                                  "in standard errors"));
  }
  if (ns.size() < 2) return;
  if (linear) {
    detail::rate_check(rep, "variance slope", ns, vars, -1.3, -0.7, 0.0);
  } else {
    detail::rate_check(rep, "abs error slope", ns, errs, -0.65, -0.35, 0.0);
  }
}

// ------------------------------------------------------- estimator consistency

inline void run_estimator_consistency(const ResolvedConfig& cfg, ExperimentReport& rep, const RunOptions& opt) {
  const DiffusionCoefficient F = cfg.diffusion();
  const double theta = cfg.params.theta;
  std::vector<double> medians;
  for (int N : cfg.resolutions) {
    detail::progress(opt, "estimator_consistency: N=" + std::to_string(N));
    const RotatedGrid grid = RotatedGrid::unit_window(N);
    struct Work {
      NoiseField noise;
      FieldSample v;
    };
    std::vector<double> rel(cfg.reps);
    parallel_for(
        cfg.reps, detail::effective_jobs(cfg),
        [&] { return Work{NoiseField::zeros(grid), FieldSample(grid, cfg.params, FieldKind::nonlinear)}; },
        [&](Work& w, std::size_t r) {
          w.noise.regenerate(cfg.seed + r);
          march_into(w.v, cfg.params, F, w.noise);
          rel[r] = std::abs(estimate_theta(w.v, F, N) - theta) / theta;
        });
    const double med = median(rel);
    // Normal-approximation standard error of a median.
    const double se = rel.size() > 1 ? 1.2533 * std::sqrt(variance(rel) / static_cast<double>(rel.size())) : 0.0;
    rep.rows.push_back({"median relative error", static_cast<double>(N), med, se});
    medians.push_back(med);
  }
  double worst_step = -kUnbounded;
  for (std::size_t k = 1; k < medians.size(); ++k) worst_step = std::max(worst_step, medians[k] - medians[k - 1]);
  if (medians.size() > 1)
    rep.checks.push_back(within("median non-increasing in N", worst_step, -kUnbounded, 0.0,
                                "largest increase between consecutive N"));
  rep.checks.push_back(within("median relative error at N=" + std::to_string(cfg.resolutions.back()),
                              medians.back(), 0.0, 0.05));
}

// ---------------------------------------------------------------- oracle check

/// Worst ratio d[k+1]/d[k] for k >= from. Steps whose difference is already at
/// rounding level (1e-12 of the first step) are skipped: there the ratio is noise.
inline double contraction_after(const std::vector<double>& d, std::size_t from) {
  if (d.empty()) return 0.0;
  const double floor = 1e-12 * d.front();
  double worst = 0.0;
  for (std::size_t k = from; k + 1 < d.size(); ++k) {
    if (d[k] <= floor) continue;
    worst = std::max(worst, d[k + 1] / d[k]);
  }
  return worst;
}

inline void run_oracle_check(const ResolvedConfig& cfg, ExperimentReport& rep, const RunOptions& opt) {
  const DiffusionCoefficient F = cfg.diffusion();
  std::vector<double> medians;
  for (int n : cfg.resolutions) {
    detail::progress(opt, "oracle_check: n=" + std::to_string(n));
    const RotatedGrid grid = RotatedGrid::unit_window(n);
    const int K = std::max(kPicardMinIterations, 2 * n + 4);  // causal depth is 2n
    std::vector<double> sup(cfg.reps), contraction(cfg.reps);
    parallel_for(
        cfg.reps, detail::effective_jobs(cfg), [] { return 0; },
        [&](int&, std::size_t r) {
          const NoiseField noise = NoiseField::generate(grid, cfg.seed + r);
          const PicardResult pr = picard_oracle_trace(cfg.params, F, noise, K);
          sup[r] = sup_difference(march(cfg.params, F, noise), pr.field);
          contraction[r] = contraction_after(pr.differences, 3);
        });
    const double med = median(sup);
    const double eps = grid.eps();
    rep.rows.push_back({"median sup |scheme - oracle|", static_cast<double>(n), med,
                        sup.size() > 1 ? 1.2533 * std::sqrt(variance(sup) / static_cast<double>(sup.size())) : 0.0});
    rep.rows.push_back({"max sup |scheme - oracle|", static_cast<double>(n), *std::max_element(sup.begin(), sup.end()),
                        0.0});
    medians.push_back(med);
    rep.checks.push_back(within("median sup difference at n=" + std::to_string(n), med, 0.0,
                                kOracleScale * std::sqrt(eps), "calibrated threshold 0.25*sqrt(1/n)"));
    rep.checks.push_back(within("Picard contraction ratio after k=3 at n=" + std::to_string(n),
                                *std::max_element(contraction.begin(), contraction.end()), 0.0, kOracleContraction));

    // Undamped massless linear case: exact agreement expected.
    PhysParams lin = linear_params(cfg.params);
    lin.a = 0.0;
    lin.m = 0.0;
    const NoiseField noise = NoiseField::generate(grid, cfg.seed);
    const double d = sup_difference(march_linear(lin, noise),
                                    picard_oracle(lin, DiffusionCoefficient::constant_one(), noise, K));
    rep.rows.push_back({"linear undamped sup difference / eps^2", static_cast<double>(n), d / (eps * eps), 0.0});
    rep.checks.push_back(within("linear undamped agreement at n=" + std::to_string(n), d / (eps * eps), 0.0,
                                kOracleLinearTolerance, "in units of eps^2"));
  }
  double worst_step = -kUnbounded;
  for (std::size_t k = 1; k < medians.size(); ++k) worst_step = std::max(worst_step, medians[k] - medians[k - 1]);
  if (medians.size() > 1)
    rep.checks.push_back(within("median sup difference decreasing in n", worst_step, -kUnbounded, 0.0));
}

// ------------------------------------------------------------------------ run

/// Runs a resolved configuration. Numeric failures are caught and recorded in
/// the report; usage errors propagate.
inline ExperimentReport run(const ResolvedConfig& cfg, const RunOptions& opt = {}) {
  ExperimentReport rep;
  rep.config = cfg;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.experiment) {
      case ExperimentId::green_identities: run_green_identities(cfg, rep, opt); break;
      case ExperimentId::kernel_lemma: run_kernel_lemma(cfg, rep, opt); break;
      case ExperimentId::linear_variance: run_linear_variance(cfg, rep, opt); break;
      case ExperimentId::remainder_rate: run_remainder_rate(cfg, rep, opt); break;
      case ExperimentId::quadvar_rate: run_quadvar_rate(cfg, rep, opt); break;
      case ExperimentId::estimator_consistency: run_estimator_consistency(cfg, rep, opt); break;
      case ExperimentId::oracle_check: run_oracle_check(cfg, rep, opt); break;
    }
  } catch (const UsageError&) {
    throw;
  } catch (const ConfigurationError& e) {
    throw UsageError("config", e.what());
  } catch (const std::exception& e) {
    rep.numeric_failure = true;
    rep.diagnostic = e.what();
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline ExperimentReport run(const ExperimentConfig& cfg, const RunOptions& opt = {}) { return run(resolve(cfg), opt); }

}  // namespace kgqv::harness
