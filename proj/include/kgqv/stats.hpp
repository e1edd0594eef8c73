#pragma once

// Sample statistics with a fixed summation order, and log-log rate fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kgqv/errors.hpp"

namespace kgqv {

/// Pairwise (binary tree) sum. The tree depends only on the length, so the
/// result is reproducible whatever order the values were produced in.
inline double pairwise_sum(std::span<const double> x) noexcept {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two values");
  const double m = mean(x);
  std::vector<double> sq(x.size());
  std::transform(x.begin(), x.end(), sq.begin(), [m](double v) { return (v - m) * (v - m); });
  return pairwise_sum(sq) / static_cast<double>(x.size() - 1);
}

inline double standard_error(std::span<const double> x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

inline double median(std::span<const double> x) {
  if (x.empty()) throw DomainError("median of an empty sample");
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  ///< 0 when only two points are fitted
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope x.
inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("ols: x and y differ in length");
  if (x.size() < 2) throw DomainError("ols needs at least two points");
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw NumericFailure("ols: non-finite input");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw DomainError("ols: all abscissae coincide");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = x.size();
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = y[k] - fit.intercept - fit.slope * x[k];
      ssr += r * r;
    }
    fit.slope_se = std::sqrt(ssr / static_cast<double>(x.size() - 2) / sxx);
  }
  return fit;
}

/// OLS on (log2 x, log2 y); every value must be positive.
inline LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0))
      throw NumericFailure("log-log fit needs positive values (entry " + std::to_string(k) + ")");
    lx[k] = std::log2(x[k]);
    ly[k] = std::log2(y[k]);
  }
  return ols(lx, ly);
}

}  // namespace kgqv
