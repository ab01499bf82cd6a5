#pragma once

// Rosenblatt sample paths as normalized partial sums of X_i^2 - 1 over
// long-range dependent fractional Gaussian noise X, plus the distributional
// transforms used to check the law of the process.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "gaussian.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace rosefract {

struct RosenblattParams {
  HurstParam hurst{0.75};
  std::size_t n = 1 << 14;
  double horizon = 1.0;

  // Exponent of the underlying fGn, (1 + H) / 2.
  double fgn_exponent() const noexcept { return 0.5 * (1.0 + hurst.value()); }

  void validate() const {
    if (n < 2) {
      throw std::domain_error("Rosenblatt path needs n >= 2 steps");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw std::domain_error("Rosenblatt horizon must be positive");
    }
  }
};

struct Normalization {
  double scale = 0.0; // A_n
};

// A_n^2 = 2 * sum_{i,j<=n} r(|i-j|)^2, accumulated by lag in O(n).
inline Normalization hermite2_normalization(double h, std::size_t n) {
  if (n < 1) {
    throw std::domain_error("hermite2_normalization: n >= 1 required");
  }
  long double acc = static_cast<long double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    const long double r = fgn_autocovariance(h, k);
    acc += 2.0L * static_cast<long double>(n - k) * r * r;
  }
  return {static_cast<double>(std::sqrt(2.0L * acc))};
}

namespace detail {
inline double cached_normalization(double h, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<double, std::size_t>, double> cache;
  const auto key = std::make_pair(h, n);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) {
      return it->second;
    }
  }
  const double a = hermite2_normalization(h, n).scale;
  std::lock_guard lock(mutex);
  cache.emplace(key, a);
  return a;
}
} // namespace detail

// Z(t_j) = T^H * (sum_{i<=j} (X_i^2 - 1)) / A_n on t_j = j T / n, Z(0) = 0.
inline SamplePath simulate_path(const RosenblattParams &params, std::uint64_t seed) {
  params.validate();
  const double h = params.fgn_exponent();
  const auto noise = fgn_sample(FgnParams{h, params.n}, seed);
  const double factor =
      std::pow(params.horizon, params.hurst.value()) / detail::cached_normalization(h, params.n);

  SamplePath path;
  path.grid = PathGrid::uniform(0.0, params.horizon / static_cast<double>(params.n), params.n);
  path.hurst = params.hurst.value();
  path.seed = seed;
  path.values.resize(params.n + 1);
  path.values[0] = 0.0;
  double partial = 0.0;
  for (std::size_t i = 0; i < params.n; ++i) {
    partial += noise[i] * noise[i] - 1.0;
    path.values[i + 1] = factor * partial;
  }
  return path;
}

// Index of the uniform-grid node at time t; throws if t is not a node.
inline std::size_t node_index(const SamplePath &path, double t) {
  if (path.grid.kind != GridKind::uniform) {
    throw std::domain_error("node_index needs a uniform grid");
  }
  const double pos = (t - path.grid.t0) / path.grid.dt;
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) > 1e-6 || rounded < 0.0 ||
      rounded > static_cast<double>(path.grid.n)) {
    throw std::domain_error("time " + std::to_string(t) + " is not a grid node");
  }
  return static_cast<std::size_t>(rounded);
}

inline double value_at(const SamplePath &path, double t) {
  return path.values[node_index(path, t)];
}

// Restriction of a uniform path to the geometric grid t0 * ratio^i, i = 0..steps.
// Every geometric time must be a node of the uniform grid.
inline SamplePath sample_geometric(const SamplePath &path, double t0, double ratio,
                                   std::size_t steps) {
  SamplePath out;
  out.grid = PathGrid::geometric(t0, ratio, steps);
  out.hurst = path.hurst;
  out.seed = path.seed;
  out.values.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    out.values[i] = value_at(path, out.grid.time(i));
  }
  return out;
}

// t -> t^{2H} Z(1/t) on a geometric grid symmetric under inversion (t0 * t_n = 1).
inline SamplePath time_invert(const SamplePath &path) {
  if (path.grid.kind != GridKind::geometric) {
    throw std::domain_error("time_invert needs a geometric grid");
  }
  const double t0 = path.grid.t0;
  const double tn = path.grid.horizon();
  if (std::abs(t0 * tn - 1.0) > 1e-9) {
    throw std::domain_error("time_invert needs a grid with t0 * t_n = 1");
  }
  path.validate();
  const std::size_t n = path.grid.n;
  const double two_h = 2.0 * path.hurst;
  SamplePath out = path;
  for (std::size_t j = 0; j <= n; ++j) {
    // t_j = 1 / t_{n-j}
    out.values[j] = std::pow(path.grid.time(j), two_h) * path.values[n - j];
  }
  return out;
}

struct SelfSimilarityQuery {
  double hurst = 0.7;
  double c = 2.0;
  double t = 0.5;
  std::size_t replicas = 2000;
  std::size_t steps_per_unit = 1 << 14;
  std::uint64_t seed = 1;
  // Exponent applied as c^exponent; NaN means use hurst.
  double exponent = std::numeric_limits<double>::quiet_NaN();
};

// KS distance between independent samples of Z(ct) and c^H Z(t).
inline KsResult self_similarity_stat(const SelfSimilarityQuery &q) {
  if (q.replicas < 50) {
    throw InsufficientSampleError("self_similarity_stat: need >= 50 replicas");
  }
  if (!(q.c > 0.0) || !(q.t > 0.0)) {
    throw std::domain_error("self_similarity_stat: c and t must be positive");
  }
  const double horizon = std::max(q.c * q.t, q.t);
  const auto steps =
      static_cast<std::size_t>(std::llround(horizon * static_cast<double>(q.steps_per_unit)));
  RosenblattParams params{HurstParam(q.hurst), steps, horizon};
  const double expo = std::isnan(q.exponent) ? q.hurst : q.exponent;
  const double scale = std::pow(q.c, expo);
  std::vector<double> scaled_time(q.replicas);
  std::vector<double> scaled_value(q.replicas);
  parallel_for(2 * q.replicas, [&](std::size_t i) {
    const auto path = simulate_path(params, derive_seed(q.seed, i));
    if (i < q.replicas) {
      scaled_time[i] = value_at(path, q.c * q.t);
    } else {
      scaled_value[i - q.replicas] = scale * value_at(path, q.t);
    }
  });
  return ks_two_sample(scaled_time, scaled_value);
}

struct TailPoint {
  double u = 0.0;
  double probability = 0.0;
};

struct OscillationQuery {
  double hurst = 0.7;
  double s = 1.0;
  double half_width = 1.0 / 64.0;
  std::vector<double> u_grid;
  std::size_t replicas = 2000;
  std::size_t steps_per_unit = 1 << 14;
  std::uint64_t seed = 1;
};

// Empirical P(sup_{|t-s|<=h} |Z_t - Z_s| >= u) for each u on the grid.
// Increments are stationary, so the law does not depend on s and each replica
// is simulated on [0, 2h] with centre h; steps_per_unit sets the resolution.
inline std::vector<TailPoint> oscillation_tail(const OscillationQuery &q) {
  if (!(q.half_width > 0.0 && q.half_width < q.s)) {
    throw std::domain_error("oscillation_tail: need 0 < h < s");
  }
  const double horizon = 2.0 * q.half_width;
  const auto half_steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(q.half_width * static_cast<double>(q.steps_per_unit))));
  RosenblattParams params{HurstParam(q.hurst), 2 * half_steps, horizon};
  std::vector<double> sups(q.replicas);
  parallel_for(q.replicas, [&](std::size_t i) {
    const auto path = simulate_path(params, derive_seed(q.seed, i));
    const double centre = path.values[half_steps];
    double sup = 0.0;
    for (double v : path.values) {
      sup = std::max(sup, std::abs(v - centre));
    }
    sups[i] = sup;
  });
  std::vector<TailPoint> table;
  table.reserve(q.u_grid.size());
  for (double u : q.u_grid) {
    std::size_t hits = 0;
    for (double v : sups) {
      hits += v >= u ? 1 : 0;
    }
    table.push_back({u, static_cast<double>(hits) / static_cast<double>(sups.size())});
  }
  return table;
}

} // namespace rosefract
