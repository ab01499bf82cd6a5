#pragma once

// Exact fractional Gaussian noise by circulant embedding of the autocovariance.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "random.hpp"

namespace rosefract {

class EmbeddingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FgnParams {
  double h = 0.85;
  std::size_t n = 1;

  void validate() const {
    if (!(h > 0.0 && h < 1.0)) {
      throw std::domain_error("fGn exponent must lie in (0, 1)");
    }
    if (n < 1) {
      throw std::domain_error("fGn sample count must be >= 1");
    }
  }
};

// r(k) = (|k+1|^{2h} - 2|k|^{2h} + |k-1|^{2h}) / 2, r(0) = 1.
inline double fgn_autocovariance(double h, std::size_t k) {
  if (!(h > 0.0 && h < 1.0)) {
    throw std::domain_error("fgn_autocovariance: h outside (0, 1)");
  }
  if (k == 0) {
    return 1.0;
  }
  const double two_h = 2.0 * h;
  const double kd = static_cast<double>(k);
  if (k < 32) {
    return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) +
                  std::pow(kd - 1.0, two_h));
  }
  // Second difference cancels badly for large k (k^{2h} ~ 1e12 at k ~ 4e6);
  // expand instead: r(k) = k^{2h} sum_{j>=1} binom(2h, 2j) k^{-2j}.
  const double inv_k2 = 1.0 / (kd * kd);
  double binom = 1.0;
  double power = 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 12; ++j) {
    binom *= (two_h - (2 * j - 2)) * (two_h - (2 * j - 1)) / ((2.0 * j - 1.0) * (2.0 * j));
    power *= inv_k2;
    const double term = binom * power;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) {
      break;
    }
  }
  return std::pow(kd, two_h) * sum;
}

namespace detail {

// FFTW planning is not thread-safe; execution on distinct arrays is.
inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(fftw_complex *p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

inline FftwBuffer fftw_buffer(std::size_t n) {
  auto *p = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) {
    throw std::bad_alloc();
  }
  return FftwBuffer(p);
}

// In-place forward DFT, X_k = sum_j x_j exp(-2 pi i jk/n).
inline void fft_forward_inplace(fftw_complex *data, std::size_t n) {
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

inline std::size_t embedding_size(std::size_t n) {
  std::size_t m = 1;
  while (m < 2 * (n - 1)) {
    m <<= 1;
  }
  return m;
}

} // namespace detail

// Square roots of the circulant eigenvalues scaled by 1/m, plus diagnostics.
struct CirculantSpectrum {
  std::size_t n = 0;
  std::size_t m = 0;
  double min_eigenvalue = 0.0;
  std::vector<double> scaled_sqrt;
};

inline CirculantSpectrum circulant_spectrum(const FgnParams &params) {
  params.validate();
  CirculantSpectrum spec;
  spec.n = params.n;
  spec.m = detail::embedding_size(params.n);
  const std::size_t m = spec.m;
  auto buf = detail::fftw_buffer(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lag = k <= m / 2 ? k : m - k;
    buf[k][0] = fgn_autocovariance(params.h, lag);
    buf[k][1] = 0.0;
  }
  detail::fft_forward_inplace(buf.get(), m);
  spec.scaled_sqrt.resize(m);
  double lambda_max = 0.0;
  double lambda_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    lambda_max = std::max(lambda_max, buf[k][0]);
    lambda_min = std::min(lambda_min, buf[k][0]);
  }
  spec.min_eigenvalue = lambda_min;
  if (lambda_min < -1e-9 * std::max(1.0, lambda_max)) {
    throw EmbeddingError("circulant embedding has a negative eigenvalue " +
                         std::to_string(lambda_min));
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    spec.scaled_sqrt[k] = std::sqrt(std::max(0.0, buf[k][0]) * inv_m);
  }
  return spec;
}

// Spectra are cached per (h, n) and shared across concurrent replicas.
inline std::shared_ptr<const CirculantSpectrum> cached_spectrum(const FgnParams &params) {
  static std::mutex mutex;
  static std::map<std::pair<double, std::size_t>, std::shared_ptr<const CirculantSpectrum>> cache;
  const auto key = std::make_pair(params.h, params.n);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) {
      return it->second;
    }
  }
  auto spec = std::make_shared<const CirculantSpectrum>(circulant_spectrum(params));
  std::lock_guard lock(mutex);
  if (cache.size() > 8) {
    cache.clear();
  }
  return cache.emplace(key, std::move(spec)).first->second;
}

// n standard normals with covariance r(|i-j|). Deterministic in (params, seed).
inline std::vector<double> fgn_sample(const FgnParams &params, std::uint64_t seed) {
  params.validate();
  NormalSource normal(seed);
  if (params.n == 1) {
    return {normal()};
  }
  const auto spec = cached_spectrum(params);
  const std::size_t m = spec->m;
  auto buf = detail::fftw_buffer(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double re = normal();
    const double im = normal();
    buf[k][0] = spec->scaled_sqrt[k] * re;
    buf[k][1] = spec->scaled_sqrt[k] * im;
  }
  detail::fft_forward_inplace(buf.get(), m);
  std::vector<double> out(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    out[i] = buf[i][0];
  }
  return out;
}

} // namespace rosefract
