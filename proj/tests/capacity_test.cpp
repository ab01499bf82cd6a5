#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rosefract/fractal.hpp"

using namespace rosefract;

namespace {

double energy(const std::vector<double> &sites, const std::vector<double> &mu,
              const KernelParams &p) {
  double e = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = 0; j < sites.size(); ++j) {
      e += mu[i] * mu[j] * phi_kernel(sites[i] - sites[j], p);
    }
  }
  return e;
}

// Brute-force min energy over the simplex grid with the given step.
double grid_min_energy(const std::vector<double> &sites, const KernelParams &p, int steps) {
  const std::size_t k = sites.size();
  std::vector<int> counts(k, 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == k) {
      counts[i] = left;
      std::vector<double> mu(k);
      for (std::size_t j = 0; j < k; ++j) {
        mu[j] = static_cast<double>(counts[j]) / steps;
      }
      best = std::min(best, energy(sites, mu, p));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, steps);
  return best;
}

} // namespace

TEST(PhiKernel, SpecValues) {
  EXPECT_EQ(phi_kernel(0.0, {0.1, 0.5, 0.3, 1.0}), 1.0);
  const KernelParams p{0.01, 0.5, 0.3, 1.0};
  const double edge = std::pow(0.01, 0.5);
  EXPECT_NEAR(phi_kernel(std::nextafter(edge, 0.0), p), std::pow(0.01, 0.15), 1e-12);
  EXPECT_NEAR(phi_kernel(edge, p), std::pow(0.01, 0.15), 1e-12);
  EXPECT_NEAR(phi_kernel(0.2, {0.1, 0.5, 0.5, 1.0}), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(phi_kernel(0.2, {0.1, 0.5, 0.5, 1.0}), 0.70711, 1e-5);
}

TEST(PhiKernel, ContinuousBoundedAndRadiallyNonIncreasing) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double m = 0.1 + 0.9 * u(rng);
    const KernelParams p{0.001 + 0.5 * u(rng), 0.05 + 0.95 * u(rng), m * u(rng), m};
    double prev = 1.0;
    for (double x = 0.0; x < 2.0; x += 0.001) {
      const double v = phi_kernel(x, p);
      EXPECT_LE(v, prev + 1e-12);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
    const double a = std::pow(p.r, p.theta);
    EXPECT_NEAR(phi_kernel(std::nextafter(a, 0.0), p), phi_kernel(a, p), 1e-9);
    EXPECT_NEAR(phi_kernel(std::nextafter(p.r, 0.0), p), phi_kernel(p.r, p), 1e-9);
  }
}

TEST(Capacity, SingleSite) {
  const std::vector<double> one{0.5};
  const auto res = capacity({one, {0.1, 0.5, 0.3, 1.0}});
  EXPECT_NEAR(res.capacity, 1.0, 1e-15);
  EXPECT_NEAR(res.energy, 1.0, 1e-15);
}

TEST(Capacity, TwoFarSitesClosedFormAndGridOracle) {
  const KernelParams p{0.01, 0.5, 0.4, 1.0};
  const std::vector<double> sites{0.0, 0.3};
  const auto res = capacity({sites, p});
  const double phi = phi_kernel(0.3, p);
  EXPECT_NEAR(res.capacity, 2.0 / (1.0 + phi), 1e-6);
  EXPECT_NEAR(res.energy, grid_min_energy(sites, p, 1000), 1e-4);
  EXPECT_NEAR(res.weights[0], 0.5, 1e-3);
}

TEST(Capacity, ThreeSitesMatchSimplexGrid) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<double> sites{0.0, 0.3 * u(rng), 0.3 + 0.5 * u(rng)};
    std::sort(sites.begin(), sites.end());
    const KernelParams p{0.05, 0.3 + 0.7 * u(rng), 0.5 * u(rng), 0.5 + 0.5 * u(rng)};
    const auto res = capacity({sites, p});
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.energy, grid_min_energy(sites, p, 1000), 1e-4) << trial;
    EXPECT_GE(res.capacity, 1.0 - 1e-12);
    EXPECT_LE(res.capacity, 3.0 + 1e-12);
  }
}

TEST(Capacity, FourMutuallyFarSites) {
  const KernelParams p{0.001, 0.5, 0.4, 1.0};
  const std::vector<double> sites{0.0, 10.0, 20.0, 30.0};
  const auto res = capacity({sites, p});
  EXPECT_NEAR(res.energy, grid_min_energy(sites, p, 60), 1e-4);
  EXPECT_GT(res.capacity, 3.99);
  EXPECT_LE(res.capacity, 4.0);
}

TEST(Capacity, PermutationInvariantAndMonotoneInSites) {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const KernelParams p{0.02, 0.5, 0.3, 0.8};
  std::vector<double> sites(25);
  for (auto &v : sites) {
    v = u(rng);
  }
  const double base = capacity({sites, p}).capacity;
  auto shuffled = sites;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_NEAR(capacity({shuffled, p}).capacity, base, 1e-6);
  auto more = sites;
  more.push_back(0.5);
  more.push_back(0.77);
  EXPECT_GE(capacity({more, p}).capacity, base - 1e-6);
}

TEST(ProfileDim, UnitIntervalAtMOne) {
  const auto unit = IntervalSet::from_unsorted({{0.0, 1.0}});
  const auto est = profile_dim_estimate(unit, 0.5, 1.0, 1.0 / 512, 0.5);
  EXPECT_NEAR(est.value, 1.0, 0.05);
  EXPECT_EQ(est.method, "profile");
}

TEST(ProfileDim, SinglePointIsZero) {
  const std::vector<double> one{0.37};
  for (double m : {0.5, 1.0}) {
    for (double theta : {0.3, 1.0}) {
      EXPECT_NEAR(profile_dim_estimate(one, theta, m, 1.0 / 1024, 0.5).value, 0.0, 1e-6);
    }
  }
}

TEST(ProfileDim, NonDecreasingInM) {
  const auto cantor = cantor_prefractal(8);
  const double lo = std::pow(3.0, -7);
  const double hi = 0.25;
  double prev = -1.0;
  for (double m : {0.55, 0.7, 0.85, 1.0}) {
    const double v = profile_dim_estimate(cantor, 0.5, m, lo, hi).value;
    EXPECT_GE(v, prev - 1e-6) << m;
    prev = v;
  }
}
