#include <gtest/gtest.h>

#include <cmath>

#include "rosefract/rosenblatt.hpp"

using namespace rosefract;

namespace {

double brute_force_a2(double h, std::size_t n) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const long double r = fgn_autocovariance(h, i > j ? i - j : j - i);
      acc += r * r;
    }
  }
  return static_cast<double>(2.0L * acc);
}

std::vector<SamplePath> batch(const RosenblattParams &p, std::size_t count, std::uint64_t master) {
  std::vector<SamplePath> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = simulate_path(p, derive_seed(master, i)); });
  return out;
}

} // namespace

TEST(Hermite2Normalization, SmallCases) {
  EXPECT_NEAR(hermite2_normalization(0.85, 1).scale, std::sqrt(2.0), 1e-15);
  const double r1 = 0.5 * (std::pow(2.0, 1.7) - 2.0);
  const double a2 = hermite2_normalization(0.85, 2).scale;
  EXPECT_NEAR(a2 * a2, 2.0 * (2.0 + 2.0 * r1 * r1), 1e-12);
  EXPECT_NEAR(a2 * a2, 5.5600, 1e-4);
}

TEST(Hermite2Normalization, MatchesDoubleSum) {
  for (double h : {0.76, 0.85, 0.95}) {
    for (std::size_t n = 1; n <= 64; ++n) {
      const double a = hermite2_normalization(h, n).scale;
      EXPECT_NEAR(a * a / brute_force_a2(h, n), 1.0, 1e-12) << "h=" << h << " n=" << n;
    }
  }
}

TEST(SimulatePath, StartsAtZeroAndIsDeterministic) {
  const RosenblattParams p{HurstParam(0.7), 1024, 2.0};
  const auto a = simulate_path(p, 5);
  const auto b = simulate_path(p, 5);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values.front(), 0.0);
  EXPECT_EQ(a.size(), 1025u);
  EXPECT_DOUBLE_EQ(a.grid.horizon(), 2.0);
  EXPECT_NE(simulate_path(p, 6).values, a.values);
}

TEST(SimulatePath, RejectsBadParams) {
  EXPECT_THROW(simulate_path(RosenblattParams{HurstParam(0.7), 1, 1.0}, 1), std::domain_error);
  EXPECT_THROW(simulate_path(RosenblattParams{HurstParam(0.7), 16, 0.0}, 1), std::domain_error);
}

TEST(SimulatePath, UnitVarianceAndZeroMean) {
  const auto paths = batch(RosenblattParams{HurstParam(0.7), 1 << 14, 1.0}, 2000, 31);
  std::vector<double> end(paths.size());
  std::vector<double> mid(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    end[i] = paths[i].values.back();
    mid[i] = value_at(paths[i], 0.5);
  }
  double var = 0.0;
  for (double v : end) {
    var += v * v;
  }
  var /= static_cast<double>(end.size());
  EXPECT_NEAR(var, 1.0, 0.1);
  const double se = sample_stddev(mid) / std::sqrt(static_cast<double>(mid.size()));
  EXPECT_LT(std::abs(mean(mid)), 4.0 * se);
}

// Z has kurtosis near 11 at H = 0.7, so products are noisy; judge each entry by its own
// standard error rather than a flat tolerance.
TEST(SimulatePath, CovarianceOnEightPointGrid) {
  const double hurst = 0.7;
  const auto paths = batch(RosenblattParams{HurstParam(hurst), 1 << 14, 1.0}, 2000, 77);
  double worst_z = 0.0;
  for (int a = 1; a <= 8; ++a) {
    for (int b = a; b <= 8; ++b) {
      const double s = 0.125 * a;
      const double t = 0.125 * b;
      std::vector<double> prod;
      for (const auto &p : paths) {
        prod.push_back(value_at(p, s) * value_at(p, t));
      }
      const double two_h = 2.0 * hurst;
      const double exact =
          0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
      const double se = sample_stddev(prod) / std::sqrt(static_cast<double>(prod.size()));
      worst_z = std::max(worst_z, std::abs(mean(prod) - exact) / se);
    }
  }
  EXPECT_LE(worst_z, 4.0);
}

TEST(SimulatePath, StationaryIncrements) {
  const auto paths = batch(RosenblattParams{HurstParam(0.75), 1 << 13, 1.0}, 600, 91);
  std::vector<double> shifted;
  std::vector<double> origin;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i % 2 == 0) {
      shifted.push_back(value_at(paths[i], 0.75) - value_at(paths[i], 0.5));
    } else {
      origin.push_back(value_at(paths[i], 0.25));
    }
  }
  EXPECT_FALSE(ks_two_sample(shifted, origin).rejects_at_1pct());
}

TEST(SimulatePath, HolderSlopeOfMaxIncrement) {
  const double hurst = 0.7;
  const auto path = simulate_path(RosenblattParams{HurstParam(hurst), 1 << 16, 1.0}, 2024);
  std::vector<double> log_dt;
  std::vector<double> log_inc;
  for (std::size_t stride = 1; stride <= 256; stride *= 2) {
    double worst = 0.0;
    for (std::size_t i = 0; i + stride < path.size(); i += stride) {
      worst = std::max(worst, std::abs(path.values[i + stride] - path.values[i]));
    }
    log_dt.push_back(std::log(path.grid.dt * static_cast<double>(stride)));
    log_inc.push_back(std::log(worst));
  }
  const auto fit = ols(log_dt, log_inc);
  EXPECT_GE(fit.slope, hurst - 0.15);
  EXPECT_LE(fit.slope, hurst + 0.1);
}

TEST(TimeInvert, FixedPointAndInvolution) {
  const auto path = simulate_path(RosenblattParams{HurstParam(0.7), 1 << 10, 4.0}, 3);
  const auto geo = sample_geometric(path, 0.25, 2.0, 4);
  const auto inv = time_invert(geo);
  EXPECT_NEAR(inv.values[2], geo.values[2], 1e-15);
  // Value at t = 4 is 4^{2H} Z(1/4).
  EXPECT_NEAR(inv.values[4], std::pow(4.0, 1.4) * geo.values[0], 1e-12);
  const auto back = time_invert(inv);
  for (std::size_t i = 0; i < geo.size(); ++i) {
    EXPECT_NEAR(back.values[i], geo.values[i], 1e-12 * (1.0 + std::abs(geo.values[i])));
  }
}

TEST(TimeInvert, RejectsBadGrids) {
  const auto path = simulate_path(RosenblattParams{HurstParam(0.7), 256, 4.0}, 3);
  EXPECT_THROW(time_invert(path), std::domain_error);
  EXPECT_THROW(time_invert(sample_geometric(path, 0.5, 2.0, 3)), std::domain_error);
}

TEST(TimeInvert, PreservesLawAtTwo) {
  const auto paths = batch(RosenblattParams{HurstParam(0.7), 1 << 14, 2.0}, 2000, 404);
  std::vector<double> inverted;
  std::vector<double> direct;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto geo = sample_geometric(paths[i], 0.5, 2.0, 2);
    if (i % 2 == 0) {
      inverted.push_back(time_invert(geo).values[2]);
    } else {
      direct.push_back(geo.values[2]);
    }
  }
  EXPECT_FALSE(ks_two_sample(inverted, direct).rejects_at_1pct());
}

TEST(SelfSimilarity, IdentityScaleAccepted) {
  SelfSimilarityQuery q;
  q.hurst = 0.7;
  q.c = 1.0;
  q.t = 1.0;
  q.replicas = 500;
  q.steps_per_unit = 1 << 12;
  q.seed = 8;
  EXPECT_FALSE(self_similarity_stat(q).rejects_at_1pct());
}

TEST(SelfSimilarity, HalfTimeDoubled) {
  SelfSimilarityQuery q;
  q.hurst = 0.6;
  q.c = 2.0;
  q.t = 0.5;
  q.replicas = 2000;
  q.steps_per_unit = 1 << 14;
  q.seed = 12;
  EXPECT_FALSE(self_similarity_stat(q).rejects_at_1pct());
}

TEST(SelfSimilarity, WrongExponentIsDetected) {
  SelfSimilarityQuery q;
  q.hurst = 0.7;
  q.c = 4.0;
  q.t = 0.25;
  q.replicas = 1000;
  q.steps_per_unit = 1 << 12;
  q.seed = 15;
  q.exponent = 0.9;
  EXPECT_TRUE(self_similarity_stat(q).rejects_at_1pct());
}

TEST(SelfSimilarity, TooFewReplicas) {
  SelfSimilarityQuery q;
  q.replicas = 10;
  EXPECT_THROW(self_similarity_stat(q), InsufficientSampleError);
}

TEST(OscillationTail, MonotoneAndExponentialType) {
  OscillationQuery q;
  q.hurst = 0.7;
  q.s = 1.0;
  q.half_width = 1.0 / 64.0;
  q.replicas = 20000;
  q.steps_per_unit = 1 << 14;
  q.seed = 99;
  for (int k = 0; k <= 60; ++k) {
    q.u_grid.push_back(0.01 * k);
  }
  const auto table = oscillation_tail(q);
  ASSERT_EQ(table.size(), q.u_grid.size());
  EXPECT_EQ(table.front().probability, 1.0);
  std::vector<double> us;
  std::vector<double> logp;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i > 0) {
      EXPECT_LE(table[i].probability, table[i - 1].probability);
    }
    if (table[i].probability >= 1e-3 && table[i].probability <= 1e-1) {
      us.push_back(table[i].u);
      logp.push_back(std::log(table[i].probability));
    }
  }
  ASSERT_GE(us.size(), 3u);
  const auto fit = ols(us, logp);
  EXPECT_LT(fit.slope, 0.0);
  EXPECT_GE(fit.r_squared, 0.9);
}

TEST(OscillationTail, RejectsWideWindow) {
  OscillationQuery q;
  q.s = 0.1;
  q.half_width = 0.2;
  EXPECT_THROW(oscillation_tail(q), std::domain_error);
}
