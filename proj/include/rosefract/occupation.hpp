#pragma once

// Random sets carved from a sample path (sojourn and level sets), image points,
// and epsilon-band local time estimates.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "stats.hpp"

namespace rosefract {

struct SojournParams {
  double gamma = 0.0;
  // Threshold multiplier: the set is {t : |Z(t)| <= scale * t^gamma}.
  double scale = 1.0;
};

struct LevelParams {
  double x = 0.0;
  double delta = 0.0;
};

struct LocalTimeEstimate {
  double x = 0.0;
  double a = 0.0;
  double b = 0.0;
  double eps = 0.0;
  double value = 0.0;
};

namespace detail {

template <class Inside>
IntervalSet cells_with_marked_endpoint(const SamplePath &path, Inside inside) {
  IntervalSet out;
  const std::size_t n = path.grid.n;
  bool prev = inside(std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const bool next = inside(i + 1);
    if (prev || next) {
      out.push_back({path.time(i), path.time(i + 1)});
    }
    prev = next;
  }
  return out;
}

inline void require_uniform(const SamplePath &path, const char *what) {
  if (path.grid.kind != GridKind::uniform) {
    throw std::domain_error(std::string(what) + " needs a uniform grid");
  }
}

// Node indices i with t_i in [a, b) on a uniform grid, clamped to the path.
inline std::pair<std::size_t, std::size_t> node_range_half_open(const SamplePath &path, double a,
                                                                double b) {
  const double dt = path.grid.dt;
  const double lo = std::ceil((a - path.grid.t0) / dt - 1e-9);
  const double hi = std::ceil((b - path.grid.t0) / dt - 1e-9);
  const double last = static_cast<double>(path.grid.n) + 1.0;
  const auto first = static_cast<std::size_t>(std::clamp(lo, 0.0, last));
  const auto stop = static_cast<std::size_t>(std::clamp(hi, 0.0, last));
  return {first, std::max(first, stop)};
}

} // namespace detail

// Union of grid cells [t_i, t_{i+1}] with an endpoint satisfying |Z| <= scale * t^gamma.
// 0^0 is taken as 1, so gamma = 0 always includes t = 0.
inline IntervalSet sojourn_set(const SamplePath &path, const SojournParams &params) {
  path.validate();
  return detail::cells_with_marked_endpoint(path, [&](std::size_t i) {
    const double t = path.time(i);
    const double bound = params.scale * std::pow(t, params.gamma);
    return std::abs(path.values[i]) <= bound;
  });
}

// lambda * (std of one-step increments); the increment std estimates sigma * dt^H.
inline double default_level_band(const SamplePath &path, double lambda = 1.0) {
  if (path.values.size() < 3) {
    throw std::invalid_argument("default_level_band needs at least 2 increments");
  }
  std::vector<double> inc(path.values.size() - 1);
  for (std::size_t i = 0; i + 1 < path.values.size(); ++i) {
    inc[i] = path.values[i + 1] - path.values[i];
  }
  return lambda * sample_stddev(inc);
}

// Cells with an endpoint inside the band |Z - x| <= delta, or where Z - x changes sign.
inline IntervalSet level_set(const SamplePath &path, const LevelParams &params) {
  if (!(params.delta > 0.0)) {
    throw std::domain_error("level_set: band half-width must be positive");
  }
  path.validate();
  IntervalSet out;
  const auto &z = path.values;
  for (std::size_t i = 0; i < path.grid.n; ++i) {
    const double u = z[i] - params.x;
    const double v = z[i + 1] - params.x;
    if (std::abs(u) <= params.delta || std::abs(v) <= params.delta || (u < 0.0) != (v < 0.0)) {
      out.push_back({path.time(i), path.time(i + 1)});
    }
  }
  return out;
}

// (dt / 2 eps) * #{i : t_i in [a, b), |Z(t_i) - x| <= eps}.
inline LocalTimeEstimate local_time(const SamplePath &path, double x, double a, double b,
                                    double eps) {
  detail::require_uniform(path, "local_time");
  if (!(eps > 0.0)) {
    throw std::domain_error("local_time: eps must be positive");
  }
  if (!(a < b) || a < path.grid.t0 || b > path.grid.horizon() + path.grid.dt) {
    throw std::domain_error("local_time: window outside the path horizon");
  }
  const auto [first, stop] = detail::node_range_half_open(path, a, b);
  std::size_t count = 0;
  for (std::size_t i = first; i < stop; ++i) {
    count += std::abs(path.values[i] - x) <= eps ? 1 : 0;
  }
  return {x, a, b, eps, path.grid.dt / (2.0 * eps) * static_cast<double>(count)};
}

// Levels lo, lo + spacing, ..., covering [lo, hi].
inline std::vector<double> level_grid(double lo, double hi, double spacing) {
  if (!(spacing > 0.0) || hi < lo) {
    throw std::domain_error("level_grid: bad range");
  }
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / spacing)) + 1;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(lo + spacing * static_cast<double>(k));
  }
  return out;
}

// max over window centres s and levels x of L(x, [s - r, s + r)).
// Empty `centres` means centres spaced r apart with windows inside `range`.
inline double local_time_sup(const SamplePath &path, Interval range, double r, double eps,
                             std::span<const double> x_grid,
                             std::span<const double> centres = {}) {
  detail::require_uniform(path, "local_time_sup");
  if (!(r > 0.0) || !(eps > 0.0)) {
    throw std::domain_error("local_time_sup: r and eps must be positive");
  }
  std::vector<double> own_centres;
  if (centres.empty()) {
    for (double s = range.a + r; s <= range.b - r + 1e-12; s += r) {
      own_centres.push_back(s);
    }
    centres = own_centres;
  }
  double best = 0.0;
  std::vector<double> window;
  for (double s : centres) {
    const auto [first, stop] = detail::node_range_half_open(path, s - r, s + r);
    window.assign(path.values.begin() + static_cast<std::ptrdiff_t>(first),
                  path.values.begin() + static_cast<std::ptrdiff_t>(stop));
    std::sort(window.begin(), window.end());
    for (double x : x_grid) {
      const auto lo = std::lower_bound(window.begin(), window.end(), x - eps);
      const auto hi = std::upper_bound(lo, window.end(), x + eps);
      best = std::max(best, static_cast<double>(hi - lo));
    }
  }
  return path.grid.dt / (2.0 * eps) * best;
}

// Grid times lying in E.
inline std::vector<double> nodes_in(const SamplePath &path, const IntervalSet &set) {
  std::vector<double> out;
  if (path.grid.kind == GridKind::uniform) {
    const double dt = path.grid.dt;
    for (const auto &iv : set) {
      const double lo = std::max(0.0, std::ceil((iv.a - path.grid.t0) / dt - 1e-9));
      const double hi = std::min(static_cast<double>(path.grid.n),
                                 std::floor((iv.b - path.grid.t0) / dt + 1e-9));
      for (double k = lo; k <= hi; k += 1.0) {
        const double t = path.grid.t0 + k * dt;
        if (out.empty() || t > out.back()) {
          out.push_back(t);
        }
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (set.contains(path.time(i))) {
      out.push_back(path.time(i));
    }
  }
  return out;
}

// Values Z(t_i) at grid times t_i in E.
inline std::vector<double> image_points(const SamplePath &path, const IntervalSet &set) {
  std::vector<double> out;
  if (path.grid.kind == GridKind::uniform) {
    const double dt = path.grid.dt;
    std::size_t last = 0;
    bool any = false;
    for (const auto &iv : set) {
      const double lo = std::max(0.0, std::ceil((iv.a - path.grid.t0) / dt - 1e-9));
      const double hi = std::min(static_cast<double>(path.grid.n),
                                 std::floor((iv.b - path.grid.t0) / dt + 1e-9));
      for (double k = lo; k <= hi; k += 1.0) {
        const auto idx = static_cast<std::size_t>(k);
        if (!any || idx > last) {
          out.push_back(path.values[idx]);
          last = idx;
          any = true;
        }
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (set.contains(path.time(i))) {
      out.push_back(path.values[i]);
    }
  }
  return out;
}

} // namespace rosefract
