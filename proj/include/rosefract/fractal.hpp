#pragma once

// Scale-local dimension machinery on subsets of the line: box and packing
// counts, the constrained-cover content H^s_{r,theta}, the capacity kernel
// phi_{r,theta}^{s,m}, and the regression estimators built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "stats.hpp"

namespace rosefract {

class InsufficientScalesError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Grid snapping tolerance, in units of the box size.
inline constexpr double kSnap = 1e-9;

inline std::int64_t box_of(double x, double delta) {
  return static_cast<std::int64_t>(std::floor(x / delta + kSnap));
}

// Boxes [k delta, (k+1) delta) met by an interval read as half-open [a, b);
// degenerate intervals meet the box holding a.
inline std::pair<std::int64_t, std::int64_t> boxes_of(const Interval &iv, double delta) {
  const auto lo = box_of(iv.a, delta);
  const auto hi = static_cast<std::int64_t>(std::ceil(iv.b / delta - kSnap)) - 1;
  return {lo, std::max(lo, hi)};
}

inline void require_sorted(std::span<const double> points) {
  if (!std::is_sorted(points.begin(), points.end())) {
    throw std::invalid_argument("points must be sorted");
  }
}

} // namespace detail

// Occupied box indices at size delta, sorted and unique.
inline std::vector<std::int64_t> occupied_boxes(std::span<const double> points, double delta) {
  std::vector<std::int64_t> out;
  out.reserve(points.size());
  for (double x : points) {
    out.push_back(detail::box_of(x, delta));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<std::int64_t> occupied_boxes(const IntervalSet &set, double delta) {
  std::vector<std::int64_t> out;
  for (const auto &iv : set) {
    const auto [lo, hi] = detail::boxes_of(iv, delta);
    for (auto k = std::max(lo, out.empty() ? lo : out.back() + 1); k <= hi; ++k) {
      out.push_back(k);
    }
  }
  return out;
}

inline std::size_t box_count(std::span<const double> points, double delta) {
  if (!(delta > 0.0)) {
    throw std::domain_error("box_count: delta must be positive");
  }
  return occupied_boxes(points, delta).size();
}

inline std::size_t box_count(const IntervalSet &set, double delta) {
  if (!(delta > 0.0)) {
    throw std::domain_error("box_count: delta must be positive");
  }
  std::size_t count = 0;
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  for (const auto &iv : set) {
    auto [lo, hi] = detail::boxes_of(iv, delta);
    lo = std::max(lo, last == std::numeric_limits<std::int64_t>::min() ? lo : last + 1);
    if (hi >= lo) {
      count += static_cast<std::size_t>(hi - lo + 1);
      last = hi;
    }
  }
  return count;
}

// Dyadic scales 2^-k inside [lo, hi], largest first.
inline std::vector<double> dyadic_scales(double lo, double hi) {
  if (!(lo > 0.0) || !(lo < hi)) {
    throw std::domain_error("dyadic_scales: need 0 < lo < hi");
  }
  std::vector<double> out;
  const int kmin = static_cast<int>(std::ceil(-std::log2(hi) - 1e-9));
  const int kmax = static_cast<int>(std::floor(-std::log2(lo) + 1e-9));
  for (int k = kmin; k <= kmax; ++k) {
    out.push_back(std::ldexp(1.0, -k));
  }
  return out;
}

namespace detail {

template <class CountFn>
DimensionEstimate log_log_slope(std::span<const double> scales, CountFn count,
                                const std::string &method) {
  if (scales.size() < 4) {
    throw InsufficientScalesError(method + ": need at least 4 scales, got " +
                                  std::to_string(scales.size()));
  }
  DimensionEstimate est;
  est.method = method;
  est.scale_lo = *std::min_element(scales.begin(), scales.end());
  est.scale_hi = *std::max_element(scales.begin(), scales.end());
  std::vector<double> xs;
  std::vector<double> ys;
  for (double d : scales) {
    const auto c = static_cast<double>(count(d));
    est.diagnostics.push_back({d, c, c > 0.0, c > 0.0 ? "" : "empty"});
    if (c > 0.0) {
      xs.push_back(std::log(1.0 / d));
      ys.push_back(std::log(c));
    }
  }
  if (xs.size() < 3) {
    est.flags.push_back("empty-set");
    return est;
  }
  const auto fit = ols(xs, ys);
  est.value = fit.slope;
  est.stderr_ = fit.stderr_slope;
  return est;
}

} // namespace detail

template <class Set>
DimensionEstimate box_dim_estimate(const Set &set, double delta_lo, double delta_hi) {
  const auto scales = dyadic_scales(delta_lo, delta_hi);
  return detail::log_log_slope(
      scales, [&](double d) { return box_count(set, d); }, "box");
}

inline DimensionEstimate box_dim_estimate(std::span<const double> points, double delta_lo,
                                          double delta_hi) {
  return box_dim_estimate<std::span<const double>>(points, delta_lo, delta_hi);
}

// Greedy left-to-right packing by disjoint closed balls of radius delta centred
// in the set; optimal on the line for equal radii.
inline std::size_t packing_count(std::span<const double> points, double delta) {
  if (!(delta > 0.0)) {
    throw std::domain_error("packing_count: delta must be positive");
  }
  detail::require_sorted(points);
  std::size_t count = 0;
  double last = 0.0;
  for (double x : points) {
    if (count == 0 || x - last > 2.0 * delta) {
      ++count;
      last = x;
    }
  }
  return count;
}

inline std::size_t packing_count(const IntervalSet &set, double delta) {
  if (!(delta > 0.0)) {
    throw std::domain_error("packing_count: delta must be positive");
  }
  std::size_t count = 0;
  double last = 0.0;
  for (const auto &iv : set) {
    double centre = count == 0 ? iv.a : std::max(iv.a, std::nextafter(last + 2.0 * delta, HUGE_VAL));
    while (centre <= iv.b) {
      ++count;
      last = centre;
      centre = std::nextafter(last + 2.0 * delta, HUGE_VAL);
    }
  }
  return count;
}

template <class Set>
DimensionEstimate packing_predim_estimate(const Set &set, double delta_lo, double delta_hi) {
  const auto scales = dyadic_scales(delta_lo, delta_hi);
  return detail::log_log_slope(
      scales, [&](double d) { return packing_count(set, d); }, "packing");
}

inline DimensionEstimate packing_predim_estimate(std::span<const double> points, double delta_lo,
                                                 double delta_hi) {
  return packing_predim_estimate<std::span<const double>>(points, delta_lo, delta_hi);
}

// ---------------------------------------------------------------------------
// Constrained covers

struct CoverProblem {
  std::span<const double> points; // sorted
  double r = 0.1;
  double theta = 1.0;
  double s = 1.0;

  void validate() const {
    if (!(r > 0.0 && r < 1.0)) {
      throw std::domain_error("CoverProblem: r must lie in (0, 1)");
    }
    if (!(theta > 0.0 && theta <= 1.0)) {
      throw std::domain_error("CoverProblem: theta must lie in (0, 1]");
    }
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::domain_error("CoverProblem: s must lie in [0, 1]");
    }
    detail::require_sorted(points);
  }
};

// Exact inf of sum |U_i|^s over covers by intervals with r <= |U_i| <= r^theta.
// dp[i] = min_{j <= i, x_i - x_j <= r^theta} dp[j-1] + max(r, x_i - x_j)^s.
inline double constrained_cover_cost(const CoverProblem &problem) {
  problem.validate();
  const auto &x = problem.points;
  const std::size_t k = x.size();
  if (k == 0) {
    return 0.0;
  }
  const double longest = std::pow(problem.r, problem.theta) * (1.0 + 1e-12);
  std::vector<double> dp(k + 1, 0.0);
  std::size_t first = 0;
  for (std::size_t i = 0; i < k; ++i) {
    while (x[i] - x[first] > longest) {
      ++first;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = first; j <= i; ++j) {
      const double len = std::max(problem.r, x[i] - x[j]);
      best = std::min(best, dp[j] + std::pow(len, problem.s));
    }
    dp[i + 1] = best;
  }
  return dp[k];
}

// Points snapped to the left edge of their box of size unit; sorted, unique.
inline std::vector<double> collapse_to_grid(std::span<const double> points, double unit) {
  const auto boxes = occupied_boxes(points, unit);
  std::vector<double> out(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    out[i] = static_cast<double>(boxes[i]) * unit;
  }
  return out;
}

inline std::vector<double> collapse_to_grid(const IntervalSet &set, double unit) {
  const auto boxes = occupied_boxes(set, unit);
  std::vector<double> out(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    out[i] = static_cast<double>(boxes[i]) * unit;
  }
  return out;
}

namespace detail {

// Extrapolates per-scale roots s(r) to r -> 0 by OLS against 1/log(1/r).
inline void extrapolate_roots(DimensionEstimate &est, const std::vector<double> &scales,
                              const std::vector<double> &roots) {
  if (scales.size() < 3) {
    throw InsufficientScalesError(est.method + ": fewer than 3 usable scales");
  }
  std::vector<double> xs(scales.size());
  for (std::size_t i = 0; i < scales.size(); ++i) {
    xs[i] = 1.0 / std::log(1.0 / scales[i]);
  }
  const auto fit = ols(xs, roots);
  est.value = fit.intercept;
  est.stderr_ = fit.stderr_intercept;
}

// Profile roots carry a log factor at finite r (the |x|^{-m} tail integrates to
// log(1/r) when m matches the dimension), so fit s = a + b log(L)/L + c/L with
// L = log(1/r). Falls back to the one-term fit below 4 scales.
inline void extrapolate_roots_log(DimensionEstimate &est, const std::vector<double> &scales,
                                  const std::vector<double> &roots) {
  const std::size_t k = scales.size();
  if (k < 4) {
    extrapolate_roots(est, scales, roots);
    return;
  }
  std::vector<std::array<double, 3>> rows(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double big_l = std::log(1.0 / scales[i]);
    rows[i] = {1.0, std::log(big_l) / big_l, 1.0 / big_l};
  }
  // Normal equations, augmented with the identity to get (X'X)^{-1}.
  double a[3][7] = {};
  for (int p = 0; p < 3; ++p) {
    for (std::size_t i = 0; i < k; ++i) {
      for (int q = 0; q < 3; ++q) {
        a[p][q] += rows[i][p] * rows[i][q];
      }
      a[p][6] += rows[i][p] * roots[i];
    }
    a[p][3 + p] = 1.0;
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int p = c + 1; p < 3; ++p) {
      if (std::abs(a[p][c]) > std::abs(a[piv][c])) {
        piv = p;
      }
    }
    std::swap(a[c], a[piv]);
    if (std::abs(a[c][c]) < 1e-300) {
      extrapolate_roots(est, scales, roots);
      return;
    }
    for (int p = 0; p < 3; ++p) {
      if (p == c) {
        continue;
      }
      const double f = a[p][c] / a[c][c];
      for (int q = 0; q < 7; ++q) {
        a[p][q] -= f * a[c][q];
      }
    }
  }
  double beta[3];
  for (int p = 0; p < 3; ++p) {
    beta[p] = a[p][6] / a[p][p];
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = roots[i] - (beta[0] + beta[1] * rows[i][1] + beta[2] * rows[i][2]);
    rss += e * e;
  }
  const double sigma2 = rss / static_cast<double>(k - 3);
  est.value = beta[0];
  est.stderr_ = std::sqrt(sigma2 * a[0][3] / a[0][0]);
}

} // namespace detail

// Root s of H^s_{r,theta} = 1 at one scale, by bisection on [0, 1].
inline double cover_root(std::span<const double> collapsed, double r, double theta,
                         int iterations = 40) {
  auto cost = [&](double s) {
    return constrained_cover_cost(CoverProblem{collapsed, r, theta, s});
  };
  if (cost(1.0) >= 1.0) {
    return 1.0;
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cost(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

template <class Set>
DimensionEstimate intermediate_dim_estimate(const Set &set, double theta, double r_lo,
                                            double r_hi) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::domain_error("intermediate_dim_estimate: theta must lie in (0, 1]");
  }
  const auto scales = dyadic_scales(r_lo, std::min(r_hi, 0.5));
  if (scales.size() < 4) {
    throw InsufficientScalesError("intermediate: need at least 4 scales");
  }
  DimensionEstimate est;
  est.method = "intermediate";
  est.scale_lo = scales.back();
  est.scale_hi = scales.front();
  std::vector<double> used_scales;
  std::vector<double> roots;
  for (double r : scales) {
    const auto collapsed = collapse_to_grid(set, r);
    if (collapsed.empty()) {
      est.diagnostics.push_back({r, 0.0, false, "empty"});
      continue;
    }
    const double root = cover_root(collapsed, r, theta);
    est.diagnostics.push_back({r, root, true, ""});
    used_scales.push_back(r);
    roots.push_back(root);
  }
  if (used_scales.size() < 3) {
    est.flags.push_back("empty-set");
    return est;
  }
  detail::extrapolate_roots(est, used_scales, roots);
  return est;
}

inline DimensionEstimate intermediate_dim_estimate(std::span<const double> points, double theta,
                                                   double r_lo, double r_hi) {
  return intermediate_dim_estimate<std::span<const double>>(points, theta, r_lo, r_hi);
}

// ---------------------------------------------------------------------------
// Capacities and dimension profiles

struct KernelParams {
  double r = 0.1;
  double theta = 1.0;
  double s = 0.5;
  double m = 1.0;

  void validate() const {
    if (!(r > 0.0 && r < 1.0) || !(theta > 0.0 && theta <= 1.0) || !(m > 0.0 && m <= 1.0) ||
        !(s >= 0.0 && s <= m)) {
      throw std::domain_error("KernelParams: need 0<r<1, 0<theta<=1, 0<m<=1, 0<=s<=m");
    }
  }
};

// 1 on |x| < r, (r/|x|)^s on r <= |x| < r^theta, r^{theta(m-s)+s} / |x|^m beyond.
inline double phi_kernel(double x, const KernelParams &p) {
  const double ax = std::abs(x);
  if (ax < p.r) {
    return 1.0;
  }
  if (ax < std::pow(p.r, p.theta)) {
    return std::pow(p.r / ax, p.s);
  }
  return std::pow(p.r, p.theta * (p.m - p.s) + p.s) / std::pow(ax, p.m);
}

struct CapacityProblem {
  std::span<const double> sites;
  KernelParams params;
};

struct CapacityResult {
  double capacity = 1.0;
  double energy = 1.0;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  std::vector<double> weights;
};

struct FrankWolfeOptions {
  double gap_tolerance = 1e-8;
  std::size_t max_iterations = 100000;
};

// Minimises mu' K mu over the probability simplex with away-step Frank-Wolfe.
// `column(v, out)` writes column v of the symmetric PSD matrix K.
template <class ColumnFn>
CapacityResult minimise_simplex_energy(std::size_t k, ColumnFn column,
                                       const FrankWolfeOptions &opts,
                                       std::span<const double> warm_start = {}) {
  CapacityResult res;
  std::vector<double> mu(k, 1.0 / static_cast<double>(k));
  if (warm_start.size() == k) {
    mu.assign(warm_start.begin(), warm_start.end());
  }
  std::vector<double> col(k);
  std::vector<double> u(k, 0.0); // K mu
  auto refresh = [&] {
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      if (mu[j] == 0.0) {
        continue;
      }
      column(j, col);
      for (std::size_t i = 0; i < k; ++i) {
        u[i] += mu[j] * col[i];
      }
    }
  };
  refresh();
  res.converged = false;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (it > 0 && it % 2000 == 0) {
      refresh();
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      quad += mu[i] * u[i];
    }
    std::size_t fw = 0;
    std::size_t away = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (u[i] < u[fw]) {
        fw = i;
      }
      if (mu[i] > 0.0 && (away == k || u[i] > u[away])) {
        away = i;
      }
    }
    // Gradient is 2u; gaps below are for the energy itself.
    const double fw_gap = 2.0 * (quad - u[fw]);
    res.duality_gap = fw_gap;
    if (fw_gap <= opts.gap_tolerance) {
      res.converged = true;
      break;
    }
    const double away_gap = 2.0 * (u[away] - quad);
    const bool toward = fw_gap >= away_gap;
    const std::size_t v = toward ? fw : away;
    column(v, col);
    // Direction d: e_v - mu (toward) or mu - e_v (away). K d = +-(col - u).
    const double sign = toward ? 1.0 : -1.0;
    const double d_dot_u = sign * (u[v] - quad);
    const double d_k_d = col[v] - 2.0 * u[v] + quad;
    double gamma_max = toward ? 1.0 : mu[v] / (1.0 - mu[v]);
    if (!toward && mu[v] >= 1.0) {
      gamma_max = 0.0;
    }
    double gamma = d_k_d > 0.0 ? -d_dot_u / d_k_d : gamma_max;
    gamma = std::clamp(gamma, 0.0, gamma_max);
    if (gamma == 0.0) {
      // No progress possible along the chosen direction.
      break;
    }
    if (toward) {
      for (std::size_t i = 0; i < k; ++i) {
        mu[i] *= (1.0 - gamma);
        u[i] = (1.0 - gamma) * u[i] + gamma * col[i];
      }
      mu[v] += gamma;
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        mu[i] *= (1.0 + gamma);
        u[i] = (1.0 + gamma) * u[i] - gamma * col[i];
      }
      mu[v] -= gamma;
      if (gamma == gamma_max || mu[v] < 1e-300) {
        mu[v] = 0.0;
      }
    }
  }
  res.iterations = it;
  double energy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    energy += mu[i] * u[i];
  }
  res.energy = energy;
  res.capacity = 1.0 / energy;
  res.weights = std::move(mu);
  return res;
}

// C = (min_{mu in simplex} sum_ij mu_i mu_j phi(x_i - x_j))^{-1}.
inline CapacityResult capacity(const CapacityProblem &problem, const FrankWolfeOptions &opts = {},
                               std::span<const double> warm_start = {}) {
  problem.params.validate();
  const auto &x = problem.sites;
  const std::size_t k = x.size();
  if (k == 0) {
    throw std::invalid_argument("capacity: need at least one site");
  }
  auto column = [&](std::size_t v, std::vector<double> &out) {
    for (std::size_t i = 0; i < k; ++i) {
      out[i] = phi_kernel(x[i] - x[v], problem.params);
    }
  };
  return minimise_simplex_energy(k, column, opts, warm_start);
}

namespace detail {

// Capacity on sites lying on an integer lattice of spacing unit; the kernel is
// tabulated by lag.
inline CapacityResult lattice_capacity(std::span<const std::int64_t> lattice, double unit,
                                       const KernelParams &params, const FrankWolfeOptions &opts,
                                       std::span<const double> warm_start) {
  params.validate();
  const std::size_t k = lattice.size();
  const auto span = static_cast<std::size_t>(lattice.back() - lattice.front());
  std::vector<double> table(span + 1);
  for (std::size_t lag = 0; lag <= span; ++lag) {
    table[lag] = phi_kernel(static_cast<double>(lag) * unit, params);
  }
  auto column = [&](std::size_t v, std::vector<double> &out) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto lag = lattice[i] > lattice[v] ? lattice[i] - lattice[v] : lattice[v] - lattice[i];
      out[i] = table[static_cast<std::size_t>(lag)];
    }
  };
  return minimise_simplex_energy(k, column, opts, warm_start);
}

} // namespace detail

struct ProfileOptions {
  std::size_t max_sites = 2000;
  int iterations = 30;
  FrankWolfeOptions solver{};
};

// Per scale r, the fixed point s = log C^{s,m}_{r,theta} / (-log r) on [0, m],
// extrapolated to r -> 0 like intermediate_dim_estimate.
template <class Set>
DimensionEstimate profile_dim_estimate(const Set &set, double theta, double m, double r_lo,
                                       double r_hi, const ProfileOptions &opts = {}) {
  if (!(m > 0.0 && m <= 1.0)) {
    throw std::domain_error("profile_dim_estimate: m must lie in (0, 1]");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::domain_error("profile_dim_estimate: theta must lie in (0, 1]");
  }
  const auto scales = dyadic_scales(r_lo, std::min(r_hi, 0.5));
  if (scales.size() < 4) {
    throw InsufficientScalesError("profile: need at least 4 scales");
  }
  DimensionEstimate est;
  est.method = "profile";
  est.scale_lo = scales.back();
  est.scale_hi = scales.front();
  std::vector<double> used_scales;
  std::vector<double> roots;
  bool any_unconverged = false;
  for (double r : scales) {
    // Outer kernel branch must start well inside a unit-size set.
    if (std::pow(r, theta) > 0.125 + 1e-12) {
      est.diagnostics.push_back({r, 0.0, false, "coarse"});
      continue;
    }
    auto boxes = occupied_boxes(set, r);
    if (boxes.empty()) {
      est.diagnostics.push_back({r, 0.0, false, "empty"});
      continue;
    }
    if (boxes.size() > opts.max_sites) {
      std::vector<std::int64_t> thinned;
      const double stride = static_cast<double>(boxes.size()) / static_cast<double>(opts.max_sites);
      for (std::size_t i = 0; i < opts.max_sites; ++i) {
        thinned.push_back(boxes[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
      }
      boxes = std::move(thinned);
    }
    const double log_inv_r = std::log(1.0 / r);
    std::vector<double> warm;
    auto excess = [&](double s) {
      const auto res = detail::lattice_capacity(boxes, r, KernelParams{r, theta, s, m},
                                                opts.solver, warm);
      any_unconverged = any_unconverged || !res.converged;
      warm = res.weights;
      return std::log(res.capacity) / log_inv_r - s;
    };
    if (excess(m) > 0.0) {
      est.diagnostics.push_back({r, m, false, "bracket"});
      continue;
    }
    double lo = 0.0;
    double hi = m;
    for (int it = 0; it < opts.iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (excess(mid) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double root = 0.5 * (lo + hi);
    est.diagnostics.push_back({r, root, true, ""});
    used_scales.push_back(r);
    roots.push_back(root);
  }
  if (any_unconverged) {
    est.flags.push_back("solver-not-converged");
  }
  if (used_scales.size() < 3) {
    est.flags.push_back("insufficient-scales");
    return est;
  }
  detail::extrapolate_roots_log(est, used_scales, roots);
  return est;
}

inline DimensionEstimate profile_dim_estimate(std::span<const double> points, double theta,
                                              double m, double r_lo, double r_hi,
                                              const ProfileOptions &opts = {}) {
  return profile_dim_estimate<std::span<const double>>(points, theta, m, r_lo, r_hi, opts);
}

// ---------------------------------------------------------------------------
// Reference sets

// Middle-thirds Cantor prefractal of the given level on [0, 1].
inline IntervalSet cantor_prefractal(int level) {
  if (level < 0 || level > 30) {
    throw std::domain_error("cantor_prefractal: level out of range");
  }
  std::vector<std::int64_t> starts{0};
  for (int l = 0; l < level; ++l) {
    std::vector<std::int64_t> next;
    next.reserve(starts.size() * 2);
    for (auto s : starts) {
      next.push_back(3 * s);
      next.push_back(3 * s + 2);
    }
    starts = std::move(next);
  }
  const double width = std::pow(3.0, -level);
  IntervalSet out;
  for (auto s : starts) {
    out.push_back({static_cast<double>(s) * width, static_cast<double>(s + 1) * width});
  }
  return out;
}

// {n^{-p} : 1 <= n <= count} together with 0, sorted.
inline std::vector<double> inverse_power_sequence(std::size_t count, double p) {
  std::vector<double> out;
  out.reserve(count + 1);
  out.push_back(0.0);
  for (std::size_t n = count; n >= 1; --n) {
    out.push_back(std::pow(static_cast<double>(n), -p));
  }
  return out;
}

} // namespace rosefract
