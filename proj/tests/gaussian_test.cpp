#include <gtest/gtest.h>

#include <cmath>

#include "rosefract/gaussian.hpp"
#include "rosefract/stats.hpp"

using namespace rosefract;

TEST(FgnAutocovariance, ClosedFormValues) {
  EXPECT_EQ(fgn_autocovariance(0.85, 0), 1.0);
  for (std::size_t k = 1; k < 10; ++k) {
    EXPECT_NEAR(fgn_autocovariance(0.5, k), 0.0, 1e-14);
  }
  EXPECT_NEAR(fgn_autocovariance(0.85, 1), 0.5 * (std::pow(2.0, 1.7) - 2.0), 1e-14);
  EXPECT_NEAR(fgn_autocovariance(0.85, 1), 0.62450, 1e-5);
  EXPECT_THROW(fgn_autocovariance(1.0, 1), std::domain_error);
  EXPECT_THROW(fgn_autocovariance(0.0, 1), std::domain_error);
}

TEST(FgnSample, DeterministicPerSeed) {
  const FgnParams p{0.85, 1000};
  EXPECT_EQ(fgn_sample(p, 17), fgn_sample(p, 17));
  EXPECT_NE(fgn_sample(p, 17), fgn_sample(p, 18));
}

TEST(FgnSample, SingleDrawIsStandardNormal) {
  const int replicas = 100000;
  double sum = 0.0;
  for (int i = 0; i < replicas; ++i) {
    sum += fgn_sample(FgnParams{0.8, 1}, static_cast<std::uint64_t>(i) * 7919 + 1)[0];
  }
  EXPECT_NEAR(sum / replicas, 0.0, 4.0 * std::pow(10.0, -2.5));
}

TEST(FgnSample, LagOneAutocovariance) {
  const FgnParams p{0.85, 1 << 12};
  double acc = 0.0;
  const int replicas = 200;
  for (int rep = 0; rep < replicas; ++rep) {
    const auto x = fgn_sample(p, 1000 + static_cast<std::uint64_t>(rep));
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      s += x[i] * x[i + 1];
    }
    acc += s / static_cast<double>(x.size() - 1);
  }
  EXPECT_NEAR(acc / replicas, 0.6245, 0.02);
}

TEST(FgnSample, EmpiricalCovarianceConvergesAtMonteCarloRate) {
  const FgnParams p{0.9, 8};
  auto max_dev = [&](int replicas, std::uint64_t base) {
    double cov[8][8] = {};
    for (int rep = 0; rep < replicas; ++rep) {
      const auto x = fgn_sample(p, base + static_cast<std::uint64_t>(rep));
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          cov[i][j] += x[i] * x[j];
        }
      }
    }
    double dev = 0.0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const double exact = fgn_autocovariance(p.h, static_cast<std::size_t>(std::abs(i - j)));
        dev = std::max(dev, std::abs(cov[i][j] / replicas - exact));
      }
    }
    return dev;
  };
  const double coarse = max_dev(1000, 1);
  const double fine = max_dev(64000, 100000);
  // Max over 64 entries of |N(0, ~2/R)|: a few standard errors.
  EXPECT_LT(coarse, 5.0 * std::sqrt(2.0 / 1000.0));
  EXPECT_LT(fine, 5.0 * std::sqrt(2.0 / 64000.0));
  EXPECT_LT(fine, coarse);
}

TEST(FgnAutocovariance, StableAtLargeLags) {
  for (double h : {0.55, 0.85, 0.95}) {
    const long double a = 2.0L * h;
    for (std::size_t k : {32u, 33u, 100u, 1000u, 10000u}) {
      const long double kd = k;
      const long double direct =
          0.5L * (std::pow(kd + 1, a) - 2.0L * std::pow(kd, a) + std::pow(kd - 1, a));
      EXPECT_NEAR(fgn_autocovariance(h, k) / static_cast<double>(direct), 1.0, 1e-9)
          << "h=" << h << " k=" << k;
    }
    // r(k) ~ h(2h-1) k^{2h-2}
    const double k = 4.0e6;
    EXPECT_NEAR(fgn_autocovariance(h, 4000000) / (h * (2 * h - 1) * std::pow(k, 2 * h - 2)), 1.0,
                1e-6);
  }
}

TEST(CirculantSpectrum, NonNegativeAtLongPaths) {
  const auto spec = circulant_spectrum(FgnParams{0.9, std::size_t{1} << 22});
  EXPECT_GE(spec.min_eigenvalue, -1e-9);
}

TEST(CirculantSpectrum, NonNegativeAcrossExponents) {
  for (double h : {0.1, 0.5, 0.76, 0.85, 0.95, 0.99}) {
    for (std::size_t n : {2u, 3u, 100u, 4096u}) {
      const auto spec = circulant_spectrum(FgnParams{h, n});
      EXPECT_GE(spec.min_eigenvalue, -1e-9) << "h=" << h << " n=" << n;
      EXPECT_GE(spec.m, 2 * (n - 1));
      EXPECT_EQ(spec.m & (spec.m - 1), 0u);
    }
  }
}

TEST(FgnParams, Validation) {
  EXPECT_THROW(fgn_sample(FgnParams{1.2, 10}, 1), std::domain_error);
  EXPECT_THROW(fgn_sample(FgnParams{0.8, 0}, 1), std::domain_error);
}
