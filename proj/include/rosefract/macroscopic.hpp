#pragma once

// Large-scale dimensions: dyadic shells S_n = [2^{n-1}, 2^n), the optimal
// proper-cover cost nu_rho^n, the macroscopic Hausdorff dimension, and the
// logarithmic and pixel densities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace rosefract {

class UndefinedDimensionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Integer cells [k, k+1) of shell n >= 1 are those with 2^{n-1} <= k < 2^n.
struct Shell {
  int n = 1;

  std::int64_t first_cell() const { return std::int64_t{1} << (n - 1); }
  std::int64_t end_cell() const { return std::int64_t{1} << n; }
  double lo() const { return n < 0 ? 0.0 : std::ldexp(1.0, n - 1); }
  double hi() const { return n < 0 ? 0.5 : std::ldexp(1.0, n); }
};

namespace detail {

struct Run {
  std::int64_t first;
  std::int64_t last;
};

inline std::vector<Run> runs_of(std::span<const std::int64_t> cells) {
  std::vector<Run> runs;
  for (auto c : cells) {
    if (!runs.empty() && runs.back().last + 1 == c) {
      runs.back().last = c;
    } else {
      runs.push_back({c, c});
    }
  }
  return runs;
}

// min over partitions of the runs into consecutive groups of sum f(hull length),
// f concave increasing with f(0) = 0. Later candidates lose ground to earlier
// ones as the right end advances, so a stack of dominance regions with binary
// searched crossovers gives O(R log R).
template <class Cost>
double concave_group_cover(const std::vector<Run> &runs, Cost f) {
  const std::size_t count = runs.size();
  std::vector<double> dp(count + 1, 0.0);
  // g(j, i): cover runs j..i with one interval on top of the best cover of runs < j.
  auto g = [&](std::size_t j, std::size_t i) {
    return dp[j] + f(static_cast<double>(runs[i].last - runs[j].first + 1));
  };
  struct Entry {
    std::size_t cand;
    std::size_t start;
  };
  std::vector<Entry> stack;
  // First i in [from, count) where older candidate `old` is at least as good as
  // `young`; count if none.
  auto crossover = [&](std::size_t old, std::size_t young, std::size_t from) {
    std::size_t lo = from;
    std::size_t hi = count;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (g(old, mid) <= g(young, mid)) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  };
  for (std::size_t i = 0; i < count; ++i) {
    // Candidate j = i becomes available once dp[i] (runs < i) is known.
    bool keep = true;
    while (!stack.empty()) {
      const auto &top = stack.back();
      const std::size_t top_end = stack.size() >= 2 ? stack[stack.size() - 2].start : count;
      const std::size_t x = crossover(top.cand, i, i);
      if (x >= top_end) {
        stack.pop_back();
        continue;
      }
      if (x == i) {
        keep = false;
      } else {
        stack.back().start = x;
      }
      break;
    }
    if (keep) {
      stack.push_back({i, i});
    }
    while (stack.size() >= 2 && stack[stack.size() - 2].start <= i) {
      stack.pop_back();
    }
    dp[i + 1] = g(stack.back().cand, i);
  }
  return dp[count];
}

} // namespace detail

// Exact inf over proper covers of sum ((diam I)/2^n)^rho. Covers use integer
// endpoints inside the closure of S_n, so the right endpoint 2^n is admissible.
// `cells` must be sorted, unique and lie in shell n.
inline double nu_rho_n(std::span<const std::int64_t> cells, int n, double rho) {
  if (n < 1) {
    throw std::domain_error("nu_rho_n: shells below n = 1 admit no proper cover");
  }
  if (rho < 0.0) {
    throw std::domain_error("nu_rho_n: rho must be non-negative");
  }
  if (cells.empty()) {
    return 0.0;
  }
  const Shell shell{n};
  if (cells.front() < shell.first_cell() || cells.back() >= shell.end_cell()) {
    throw std::domain_error("nu_rho_n: cell outside shell " + std::to_string(n));
  }
  const double scale = std::ldexp(1.0, -n);
  if (rho >= 1.0) {
    // Convex cost: unit intervals are optimal.
    return static_cast<double>(cells.size()) * std::pow(scale, rho);
  }
  const auto runs = detail::runs_of(cells);
  return detail::concave_group_cover(runs, [&](double len) { return std::pow(len * scale, rho); });
}

inline double nu_rho_n(const PixelSet &pixels, int n, double rho) {
  const Shell shell{n};
  return nu_rho_n(pixels.range(shell.first_cell(), shell.end_cell()), n, rho);
}

struct MacroParams {
  std::vector<double> rho_grid;
  int shell_lo = 1;
  int shell_hi = 20;
  // Slopes at or above -tolerance count as non-decaying.
  double slope_tolerance = 1e-9;
  std::size_t bootstrap = 200;
  std::uint64_t seed = 0x5eedULL;

  static std::vector<double> default_rho_grid() {
    std::vector<double> g;
    for (int k = 0; k <= 24; ++k) {
      g.push_back(0.05 * k);
    }
    return g;
  }
};

struct MacroTable {
  std::vector<int> shells;                 // non-empty shells used
  std::vector<double> rho_grid;
  std::vector<std::vector<double>> log2_nu; // [rho][shell]
  std::vector<double> slopes;               // per rho
};

namespace detail {

inline double slope_root(const std::vector<double> &rho, const std::vector<double> &slope,
                         double tol, bool *on_grid = nullptr) {
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (slope[k] < -tol) {
      if (on_grid != nullptr) {
        *on_grid = true;
      }
      if (k == 0) {
        return rho[0];
      }
      const double s0 = slope[k - 1];
      const double s1 = slope[k];
      const double t = std::clamp(s0 / (s0 - s1), 0.0, 1.0);
      return rho[k - 1] + t * (rho[k] - rho[k - 1]);
    }
  }
  if (on_grid != nullptr) {
    *on_grid = false;
  }
  return rho.back();
}

inline std::vector<double> slopes_for(const MacroTable &table, std::span<const std::size_t> pick) {
  std::vector<double> xs;
  for (auto p : pick) {
    xs.push_back(static_cast<double>(table.shells[p]));
  }
  std::vector<double> out;
  for (const auto &row : table.log2_nu) {
    std::vector<double> ys;
    for (auto p : pick) {
      ys.push_back(row[p]);
    }
    out.push_back(ols(xs, ys).slope);
  }
  return out;
}

} // namespace detail

inline MacroTable macro_table(const PixelSet &set, const MacroParams &params) {
  MacroTable table;
  table.rho_grid = params.rho_grid.empty() ? MacroParams::default_rho_grid() : params.rho_grid;
  table.log2_nu.assign(table.rho_grid.size(), {});
  for (int n = std::max(1, params.shell_lo); n <= params.shell_hi; ++n) {
    const Shell shell{n};
    const auto cells = set.range(shell.first_cell(), shell.end_cell());
    if (cells.empty()) {
      continue;
    }
    table.shells.push_back(n);
    for (std::size_t k = 0; k < table.rho_grid.size(); ++k) {
      table.log2_nu[k].push_back(std::log2(nu_rho_n(cells, n, table.rho_grid[k])));
    }
  }
  if (table.shells.size() >= 2) {
    std::vector<std::size_t> all(table.shells.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i] = i;
    }
    table.slopes = detail::slopes_for(table, all);
  }
  return table;
}

// Root in rho of the slope of log2 nu_rho^n against n, which is non-increasing in rho.
inline DimensionEstimate dimh_estimate(const PixelSet &set, const MacroParams &params) {
  const auto table = macro_table(set, params);
  if (table.shells.empty()) {
    throw UndefinedDimensionError("dimh_estimate: every shell is empty");
  }
  DimensionEstimate est;
  est.method = "macroscopic-hausdorff";
  est.scale_lo = params.shell_lo;
  est.scale_hi = params.shell_hi;
  if (table.shells.size() < 6) {
    throw InsufficientSampleError("dimh_estimate: need at least 6 non-empty shells, got " +
                                  std::to_string(table.shells.size()));
  }
  bool on_grid = true;
  est.value = detail::slope_root(table.rho_grid, table.slopes, params.slope_tolerance, &on_grid);
  if (!on_grid) {
    est.flags.push_back("no-root-on-grid");
  }
  for (std::size_t k = 0; k < table.rho_grid.size(); ++k) {
    est.diagnostics.push_back({table.rho_grid[k], table.slopes[k], true, "slope"});
  }

  NormalSource rng(params.seed);
  std::vector<double> boot;
  std::vector<std::size_t> pick(table.shells.size());
  for (std::size_t b = 0; b < params.bootstrap; ++b) {
    for (auto &p : pick) {
      p = rng.index(table.shells.size());
    }
    std::vector<std::size_t> distinct = pick;
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 3) {
      continue;
    }
    boot.push_back(detail::slope_root(table.rho_grid, detail::slopes_for(table, pick),
                                      params.slope_tolerance));
  }
  est.stderr_ = boot.size() >= 2 ? sample_stddev(boot) : 0.0;
  return est;
}

// ---------------------------------------------------------------------------
// Densities

enum class DensitySurrogate {
  top_half_max,   // max of a_n over the upper half of n
  top_half_slope, // OLS slope of a_n * n against n over the upper half
  last,           // a_N
};

struct DensityOptions {
  DensitySurrogate surrogate = DensitySurrogate::top_half_max;
};

namespace detail {

// log2 of the per-n totals for n = 1..N; diagnostics keep the sequence a_n.
inline DimensionEstimate density_from_totals(const std::vector<double> &totals, int horizon,
                                             const std::string &method,
                                             const DensityOptions &opts) {
  DimensionEstimate est;
  est.method = method;
  est.scale_lo = 1;
  est.scale_hi = horizon;
  const int first = (horizon + 1) / 2;
  std::vector<double> ns;
  std::vector<double> logs;
  double best = -std::numeric_limits<double>::infinity();
  for (int n = 1; n <= horizon; ++n) {
    const double total = totals[static_cast<std::size_t>(n)];
    const bool positive = total > 0.0;
    const double a = positive ? std::log2(total) / n : 0.0;
    est.diagnostics.push_back({static_cast<double>(n), a, positive && n >= first, "a_n"});
    if (positive && n >= first) {
      best = std::max(best, a);
      ns.push_back(n);
      logs.push_back(std::log2(total));
    }
  }
  if (totals[static_cast<std::size_t>(horizon)] <= 0.0) {
    est.value = 0.0;
    est.flags.push_back("zero-measure");
    return est;
  }
  switch (opts.surrogate) {
  case DensitySurrogate::top_half_max:
    est.value = best;
    break;
  case DensitySurrogate::last:
    est.value = std::log2(totals[static_cast<std::size_t>(horizon)]) / horizon;
    break;
  case DensitySurrogate::top_half_slope: {
    if (ns.size() < 3) {
      est.value = best;
      est.flags.push_back("slope-fallback");
    } else {
      const auto fit = ols(ns, logs);
      est.value = fit.slope;
      est.stderr_ = fit.stderr_slope;
    }
    break;
  }
  }
  return est;
}

inline void require_horizon(int horizon) {
  if (horizon < 6) {
    throw std::domain_error("density estimators need N >= 6");
  }
}

} // namespace detail

// limsup_n log2 Leb(E cap [1, 2^n]) / n, finite-N surrogate.
inline DimensionEstimate log_density(const IntervalSet &set, int horizon,
                                     const DensityOptions &opts = {}) {
  detail::require_horizon(horizon);
  std::vector<double> totals(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (int n = 1; n <= horizon; ++n) {
    totals[static_cast<std::size_t>(n)] = restrict(set, 1.0, std::ldexp(1.0, n)).measure();
  }
  return detail::density_from_totals(totals, horizon, "log-density", opts);
}

// limsup_n log2 #{m integer : dist(m, E cap [1, 2^n]) <= 1} / n, finite-N surrogate.
inline DimensionEstimate pixel_density(const IntervalSet &set, int horizon,
                                       const DensityOptions &opts = {}) {
  detail::require_horizon(horizon);
  std::vector<double> totals(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (int n = 1; n <= horizon; ++n) {
    const double top = std::ldexp(1.0, n);
    const auto part = restrict(set, 1.0, top);
    double count = 0.0;
    double last = 0.0;
    for (const auto &iv : part) {
      const double lo = std::max(std::ceil(iv.a - 1.0), last + 1.0);
      const double hi = std::min(std::floor(iv.b + 1.0), top);
      if (hi >= lo) {
        count += hi - lo + 1.0;
        last = hi;
      }
    }
    totals[static_cast<std::size_t>(n)] = count;
  }
  return detail::density_from_totals(totals, horizon, "pixel-density", opts);
}

inline IntervalSet to_interval_set(const PixelSet &pixels) {
  IntervalSet out;
  for (auto c : pixels) {
    out.push_back({static_cast<double>(c), static_cast<double>(c + 1)});
  }
  return out;
}

inline DimensionEstimate pixel_density(const PixelSet &pixels, int horizon,
                                       const DensityOptions &opts = {}) {
  return pixel_density(to_interval_set(pixels), horizon, opts);
}

} // namespace rosefract
