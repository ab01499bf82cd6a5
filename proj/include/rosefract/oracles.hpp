#pragma once

// Brute-force references for the exact optimisers (cover DP, proper-cover DP,
// capacity solver). Small sizes only; used by `rosefract selftest`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fractal.hpp"
#include "macroscopic.hpp"
#include "random.hpp"

namespace rosefract {

struct OracleReport {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  std::string first_failure;

  bool passed() const { return instances > 0 && failures == 0; }

  void record(double error, double tolerance, const std::string &what) {
    ++instances;
    max_error = std::max(max_error, error);
    if (!(error <= tolerance)) {
      if (failures == 0) {
        first_failure = what;
      }
      ++failures;
    }
  }
};

namespace oracle {

// Min over all set partitions of the points; each block is one interval of
// length max(r, diam), admissible when diam <= r^theta.
inline double cover_by_partitions(const std::vector<double> &x, double r, double theta, double s) {
  const std::size_t k = x.size();
  if (k == 0) {
    return 0.0;
  }
  const double longest = std::pow(r, theta) * (1.0 + 1e-12);
  std::vector<std::size_t> label(k, 0);
  double best = std::numeric_limits<double>::infinity();
  // Restricted growth strings: label[i] <= 1 + max(label[0..i-1]).
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t i, std::size_t blocks) {
    if (i == k) {
      double cost = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t j = 0; j < k; ++j) {
          if (label[j] == b) {
            lo = std::min(lo, x[j]);
            hi = std::max(hi, x[j]);
          }
        }
        if (hi - lo > longest) {
          return;
        }
        cost += std::pow(std::max(r, hi - lo), s);
      }
      best = std::min(best, cost);
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      label[i] = b;
      walk(i + 1, std::max(blocks, b + 1));
    }
  };
  walk(0, 0);
  return best;
}

// Branch and bound over proper covers: the first uncovered cell c must lie in some
// interval [x, y] with integer endpoints, lo <= x <= c, c + 1 <= y <= hi.
inline double nu_by_search(const std::vector<std::int64_t> &cells, int n, double rho) {
  if (cells.empty()) {
    return 0.0;
  }
  const Shell shell{n};
  const std::int64_t lo = shell.first_cell();
  const std::int64_t hi = shell.end_cell();
  const double scale = std::ldexp(1.0, -n);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> walk = [&](std::size_t next, double cost) {
    if (cost >= best) {
      return;
    }
    if (next == cells.size()) {
      best = cost;
      return;
    }
    const std::int64_t c = cells[next];
    for (std::int64_t x = lo; x <= c; ++x) {
      for (std::int64_t y = c + 1; y <= hi; ++y) {
        std::size_t after = next;
        while (after < cells.size() && cells[after] + 1 <= y) {
          ++after;
        }
        walk(after, cost + std::pow(static_cast<double>(y - x) * scale, rho));
      }
    }
  };
  walk(0, 0.0);
  return best;
}

inline double energy(const std::vector<double> &sites, const std::vector<double> &mu,
                     const KernelParams &p) {
  double e = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = 0; j < sites.size(); ++j) {
      e += mu[i] * mu[j] * phi_kernel(sites[i] - sites[j], p);
    }
  }
  return e;
}

// Capacity from the minimum energy over the simplex grid with the given step (k <= 3).
inline double capacity_by_grid(const std::vector<double> &sites, const KernelParams &p,
                               double step) {
  const auto steps = static_cast<int>(std::llround(1.0 / step));
  double best = std::numeric_limits<double>::infinity();
  if (sites.size() == 1) {
    return 1.0 / energy(sites, {1.0}, p);
  }
  if (sites.size() == 2) {
    for (int i = 0; i <= steps; ++i) {
      const double a = i * step;
      best = std::min(best, energy(sites, {a, 1.0 - a}, p));
    }
    return 1.0 / best;
  }
  // k = 3: tabulate the kernel once.
  double k01 = phi_kernel(sites[0] - sites[1], p);
  double k02 = phi_kernel(sites[0] - sites[2], p);
  double k12 = phi_kernel(sites[1] - sites[2], p);
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      const double a = i * step;
      const double b = j * step;
      const double c = std::max(0.0, 1.0 - a - b);
      const double e = a * a + b * b + c * c + 2.0 * (a * b * k01 + a * c * k02 + b * c * k12);
      best = std::min(best, e);
    }
  }
  return 1.0 / best;
}

} // namespace oracle

// Cover DP against partition search on every subset of size 1..5 of a 10-point grid.
inline OracleReport cover_oracle_suite() {
  OracleReport rep;
  rep.name = "cover-dp-vs-partitions";
  struct Setting {
    double r, theta, s;
  };
  const std::vector<Setting> settings{{0.1, 0.5, 0.7}, {0.15, 0.7, 0.4}, {0.1, 1.0, 0.5},
                                      {0.05, 0.3, 0.9}};
  for (const auto &st : settings) {
    for (unsigned mask = 1; mask < (1u << 10); ++mask) {
      if (__builtin_popcount(mask) > 5) {
        continue;
      }
      std::vector<double> pts;
      for (int i = 0; i < 10; ++i) {
        if (mask & (1u << i)) {
          pts.push_back(0.1 * i);
        }
      }
      const double dp = constrained_cover_cost(CoverProblem{pts, st.r, st.theta, st.s});
      const double brute = oracle::cover_by_partitions(pts, st.r, st.theta, st.s);
      std::ostringstream what;
      what << "mask=" << mask << " r=" << st.r << " theta=" << st.theta << " s=" << st.s
           << " dp=" << dp << " brute=" << brute;
      rep.record(std::abs(dp - brute), 1e-12 * std::max(1.0, brute), what.str());
    }
  }
  return rep;
}

// nu DP against branch and bound: every subset of shells 1..4, and seeded
// subsets with at most 12 cells of shell 5.
inline OracleReport nu_oracle_suite() {
  OracleReport rep;
  rep.name = "nu-dp-vs-proper-covers";
  const std::vector<double> rhos{0.3, 0.5, 1.0, 1.2};
  auto check = [&](const std::vector<std::int64_t> &cells, int n) {
    for (double rho : rhos) {
      const double dp = nu_rho_n(cells, n, rho);
      const double brute = oracle::nu_by_search(cells, n, rho);
      std::ostringstream what;
      what << "n=" << n << " rho=" << rho << " cells=" << cells.size() << " dp=" << dp
           << " brute=" << brute;
      rep.record(std::abs(dp - brute), 1e-12, what.str());
    }
  };
  for (int n = 1; n <= 4; ++n) {
    const Shell shell{n};
    const auto width = static_cast<unsigned>(shell.end_cell() - shell.first_cell());
    for (unsigned mask = 1; mask < (1u << width); ++mask) {
      std::vector<std::int64_t> cells;
      for (unsigned i = 0; i < width; ++i) {
        if (mask & (1u << i)) {
          cells.push_back(shell.first_cell() + i);
        }
      }
      check(cells, n);
    }
  }
  NormalSource rng(0x0c0ffee);
  const Shell five{5};
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t want = 1 + rng.index(12);
    std::vector<std::int64_t> cells;
    while (cells.size() < want) {
      const auto c = five.first_cell() + static_cast<std::int64_t>(rng.index(16));
      if (std::find(cells.begin(), cells.end(), c) == cells.end()) {
        cells.push_back(c);
      }
    }
    std::sort(cells.begin(), cells.end());
    check(cells, 5);
  }
  return rep;
}

// Frank-Wolfe capacity against a step-1e-3 simplex grid for k = 1, 2, 3.
inline OracleReport capacity_oracle_suite(double step = 1e-3) {
  OracleReport rep;
  rep.name = "capacity-fw-vs-simplex-grid";
  NormalSource rng(0xcab0);
  const std::vector<KernelParams> params{
      {0.1, 0.5, 0.5, 1.0}, {0.05, 0.7, 0.3, 0.8}, {0.2, 1.0, 0.6, 0.7}, {0.01, 0.3, 0.2, 0.5}};
  for (std::size_t k = 1; k <= 3; ++k) {
    for (const auto &p : params) {
      for (int trial = 0; trial < 4; ++trial) {
        std::vector<double> sites(k);
        for (auto &x : sites) {
          x = rng.uniform();
        }
        const double fw = capacity(CapacityProblem{sites, p}).capacity;
        const double grid = oracle::capacity_by_grid(sites, p, step);
        std::ostringstream what;
        what << "k=" << k << " r=" << p.r << " theta=" << p.theta << " s=" << p.s
             << " m=" << p.m << " fw=" << fw << " grid=" << grid;
        rep.record(std::abs(fw - grid), 1e-4, what.str());
      }
    }
  }
  return rep;
}

inline std::vector<OracleReport> run_oracle_suites() {
  return {cover_oracle_suite(), nu_oracle_suite(), capacity_oracle_suite()};
}

} // namespace rosefract
