#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "empiproc/common.hpp"

namespace empiproc::stats {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean_stderr: empty sample");
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  std::size_t n = x.size();
  double se = n > 1 ? std::sqrt(s2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return {m, se, n};
}

inline double sample_variance(const std::vector<double>& x) {
  auto ms = mean_stderr(x);
  double s2 = 0.0;
  for (double v : x) s2 += (v - ms.mean) * (v - ms.mean);
  return x.size() > 1 ? s2 / static_cast<double>(x.size() - 1) : 0.0;
}

// --- ordinary least squares y = intercept + slope * x ----------------------

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
};

inline LinearFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols: need two equally sized samples of length >= 2");
  std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.residual_rms = std::sqrt(ss / n);
  f.slope_stderr = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return f;
}

// --- normal distribution ----------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// --- Kolmogorov-Smirnov ------------------------------------------------------

/// Survival function of the Kolmogorov distribution.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

struct GofResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS test against a fully specified continuous cdf.
inline GofResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(x.begin(), x.end());
  double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = cdf(x[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

/// Two-sample KS test with the asymptotic p-value.
inline GofResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / x.size() - double(j) / y.size()));
  }
  double ne = double(x.size()) * y.size() / double(x.size() + y.size());
  double sn = std::sqrt(ne);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

// --- Anderson-Darling --------------------------------------------------------

/// Asymptotic cdf of the A^2 statistic for a fully specified null
/// (Marsaglia & Marsaglia 2004).
inline double anderson_darling_cdf(double z) {
  if (z <= 0.0) return 0.0;
  if (z < 2.0) {
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 +
            (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z);
  }
  return std::exp(
      -std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

/// One-sample AD test against a fully specified continuous cdf.
inline GofResult anderson_darling_test(std::vector<double> x,
                                       const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("anderson_darling_test: empty sample");
  std::sort(x.begin(), x.end());
  double n = static_cast<double>(x.size());
  double a2 = -n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double u = std::clamp(cdf(x[i]), 1e-15, 1.0 - 1e-15);
    double v = std::clamp(cdf(x[x.size() - 1 - i]), 1e-15, 1.0 - 1e-15);
    a2 -= (2.0 * (i + 1) - 1.0) / n * (std::log(u) + std::log1p(-v));
  }
  return {a2, 1.0 - anderson_darling_cdf(a2)};
}

}  // namespace empiproc::stats
