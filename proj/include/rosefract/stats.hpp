#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "random.hpp"

namespace rosefract {

class InsufficientSampleError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double stderr_intercept = 0.0;
  double r_squared = 0.0;
};

inline RegressionResult ols(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("ols: length mismatch");
  }
  if (xs.size() < 3) {
    throw InsufficientSampleError("ols: need at least 3 points");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) {
    throw std::domain_error("ols: abscissae are all equal");
  }
  RegressionResult res;
  res.slope = sxy / sxx;
  res.intercept = my - res.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (res.intercept + res.slope * xs[i]);
    sse += e * e;
  }
  const double sigma2 = sse / (n - 2.0);
  res.stderr_slope = std::sqrt(sigma2 / sxx);
  res.stderr_intercept = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
  res.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return res;
}

struct KsResult {
  double statistic = 0.0;
  double critical_1pct = 0.0;
  double critical_5pct = 0.0;

  bool rejects_at_1pct() const noexcept { return statistic > critical_1pct; }
};

// Asymptotic two-sample critical value c(alpha) * sqrt((m+n)/(mn)),
// c(alpha) = sqrt(-ln(alpha/2)/2).
inline double ks_critical_value(double alpha, std::size_t m, std::size_t n) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return c * std::sqrt((md + nd) / (md * nd));
}

inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 50 || b.size() < 50) {
    throw InsufficientSampleError("ks_two_sample: both samples need >= 50 values");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) {
      ++i;
    }
    while (j < y.size() && y[j] == v) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  KsResult res;
  res.statistic = d;
  res.critical_1pct = ks_critical_value(0.01, x.size(), y.size());
  res.critical_5pct = ks_critical_value(0.05, x.size(), y.size());
  return res;
}

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline double mean(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("mean of empty sample");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

inline double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("stddev needs >= 2 values");
  }
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

using Statistic = std::function<double(std::span<const double>)>;

// Percentile bootstrap.
inline ConfidenceInterval bootstrap_ci(std::span<const double> values, const Statistic &statistic,
                                       std::uint64_t seed, std::size_t resamples = 1000,
                                       double level = 0.95) {
  if (values.size() < 20) {
    throw InsufficientSampleError("bootstrap_ci: need at least 20 values");
  }
  NormalSource rng(seed);
  std::vector<double> stats(resamples);
  std::vector<double> draw(values.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto &v : draw) {
      v = values[rng.index(values.size())];
    }
    stats[b] = statistic(draw);
  }
  const double tail = 0.5 * (1.0 - level);
  return {quantile(stats, tail), quantile(stats, 1.0 - tail)};
}

} // namespace rosefract
