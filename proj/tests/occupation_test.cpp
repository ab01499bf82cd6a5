#include <gtest/gtest.h>

#include <cmath>

#include "rosefract/occupation.hpp"
#include "rosefract/rosenblatt.hpp"

using namespace rosefract;

namespace {

SamplePath make_path(std::vector<double> values, double dt = 0.1) {
  SamplePath p;
  p.grid = PathGrid::uniform(0.0, dt, values.size() - 1);
  p.values = std::move(values);
  return p;
}

} // namespace

TEST(SojournSet, DegeneratePaths) {
  const auto zero = make_path(std::vector<double>(11, 0.0));
  const auto full = sojourn_set(zero, {0.3});
  ASSERT_EQ(full.size(), 1u);
  EXPECT_NEAR(full.intervals()[0].a, 0.0, 1e-12);
  EXPECT_NEAR(full.intervals()[0].b, 1.0, 1e-12);

  const double gamma = 0.4;
  std::vector<double> far(11);
  for (std::size_t i = 0; i < far.size(); ++i) {
    far[i] = 2.0 * std::pow(0.1 * static_cast<double>(i), gamma) + 1.0;
  }
  EXPECT_TRUE(sojourn_set(make_path(far), {gamma}).empty());
}

TEST(SojournSet, IncludesOriginWhenGammaIsZero) {
  std::vector<double> v(11, 5.0);
  v[0] = 0.0;
  const auto set = sojourn_set(make_path(v), {0.0});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_NEAR(set.intervals()[0].b, 0.1, 1e-12);
}

TEST(SojournSet, MonotoneInGamma) {
  const auto path = simulate_path(RosenblattParams{HurstParam(0.7), 1 << 12, 64.0}, 42);
  IntervalSet prev;
  for (double g : {0.0, 0.1, 0.3, 0.5, 0.65}) {
    const auto set = sojourn_set(path, {g});
    EXPECT_GE(restrict(set, 1.0, 64.0).measure() + 1e-9, restrict(prev, 1.0, 64.0).measure());
    for (const auto &iv : prev) {
      if (iv.a >= 1.0) {
        EXPECT_TRUE(set.contains(0.5 * (iv.a + iv.b)));
      }
    }
    prev = set;
  }
}

TEST(LevelSet, MonotoneCrossingGivesOneInterval) {
  std::vector<double> v(21);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<double>(i);
  }
  const auto set = level_set(make_path(v), {7.5, 0.1});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_NEAR(set.intervals()[0].a, 0.7, 1e-12);
  EXPECT_NEAR(set.intervals()[0].b, 0.8, 1e-12);
  EXPECT_TRUE(level_set(make_path(v), {30.0, 1.0}).empty());
  EXPECT_THROW(level_set(make_path(v), {1.0, 0.0}), std::domain_error);
}

TEST(LevelSet, AgreesWithSojournAtConstantBand) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto path = simulate_path(RosenblattParams{HurstParam(0.7), 1 << 12, 1.0}, seed);
    const double delta = 0.05;
    const auto level = level_set(path, {0.0, delta});
    const auto sojourn = sojourn_set(path, {0.0, delta});
    // Sign changes without an endpoint in the band are the only possible extra cells.
    for (const auto &iv : sojourn) {
      EXPECT_TRUE(level.contains(0.5 * (iv.a + iv.b)));
    }
    const auto &z = path.values;
    for (std::size_t i = 0; i < path.grid.n; ++i) {
      const bool in_band = std::abs(z[i]) <= delta || std::abs(z[i + 1]) <= delta;
      const bool crossing = (z[i] < 0.0) != (z[i + 1] < 0.0);
      const double mid = path.time(i) + 0.5 * path.grid.dt;
      if (in_band) {
        EXPECT_TRUE(sojourn.contains(mid));
      }
      if (!in_band && !crossing) {
        EXPECT_FALSE(level.contains(mid));
        EXPECT_FALSE(sojourn.contains(mid));
      }
    }
  }
}

TEST(LevelSet, MonotoneInBand) {
  const auto path = simulate_path(RosenblattParams{HurstParam(0.8), 1 << 12, 1.0}, 7);
  const auto narrow = level_set(path, {0.1, 0.01});
  const auto wide = level_set(path, {0.1, 0.05});
  for (const auto &iv : narrow) {
    EXPECT_TRUE(wide.contains(0.5 * (iv.a + iv.b)));
  }
  EXPECT_LE(narrow.measure(), wide.measure() + 1e-12);
}

TEST(DefaultLevelBand, IncrementStd) {
  const auto path = make_path({0.0, 1.0, 0.0, 1.0, 0.0});
  // Increments +1, -1, +1, -1: sample std = sqrt(4/3).
  EXPECT_NEAR(default_level_band(path, 2.0), 2.0 * std::sqrt(4.0 / 3.0), 1e-12);
}

TEST(LocalTime, DegenerateAndFarLevel) {
  const auto zero = make_path(std::vector<double>(101, 0.0), 0.01);
  EXPECT_NEAR(local_time(zero, 0.0, 0.2, 0.6, 0.05).value, 0.4 / 0.1, 1e-9);
  EXPECT_EQ(local_time(zero, 10.0, 0.2, 0.6, 0.05).value, 0.0);
  EXPECT_THROW(local_time(zero, 0.0, 0.2, 0.6, 0.0), std::domain_error);
  EXPECT_THROW(local_time(zero, 0.0, 0.6, 0.2, 0.1), std::domain_error);
  EXPECT_THROW(local_time(zero, 0.0, 0.0, 5.0, 0.1), std::domain_error);
}

TEST(LocalTime, AdditiveOverPartitionAndBounded) {
  const auto path = simulate_path(RosenblattParams{HurstParam(0.7), 1 << 12, 1.0}, 17);
  const double eps = 0.02;
  for (double x : {-0.3, 0.0, 0.2}) {
    const double whole = local_time(path, x, 0.0, 1.0, eps).value;
    double parts = 0.0;
    const std::vector<double> cuts{0.0, 0.125, 0.3, 0.5, 0.77, 1.0};
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      parts += local_time(path, x, cuts[k], cuts[k + 1], eps).value;
    }
    EXPECT_NEAR(parts, whole, 1e-9);
    EXPECT_LE(whole * 2.0 * eps, 1.0 + path.grid.dt + 1e-12);
  }
}

TEST(LocalTime, ScalingLaw) {
  // L(0, [0, c]) has the law of c^{1-H} L(0, [0, 1]); eps scales with c^H.
  const double hurst = 0.7;
  const double c = 4.0;
  const double eps = 0.05;
  const std::size_t replicas = 1000;
  std::vector<double> big(replicas);
  std::vector<double> small(replicas);
  // Same dt on both sides. Coarser grids (2^12 per unit) are visibly off: the discrete
  // chaos sum's density near 0 converges slowly in n.
  const RosenblattParams long_params{HurstParam(hurst), 1 << 16, c};
  const RosenblattParams unit_params{HurstParam(hurst), 1 << 14, 1.0};
  parallel_for(2 * replicas, [&](std::size_t i) {
    if (i < replicas) {
      const auto p = simulate_path(long_params, derive_seed(500, i));
      big[i] = local_time(p, 0.0, 0.0, c, eps * std::pow(c, hurst)).value;
    } else {
      const auto p = simulate_path(unit_params, derive_seed(500, i));
      small[i - replicas] = std::pow(c, 1.0 - hurst) * local_time(p, 0.0, 0.0, 1.0, eps).value;
    }
  });
  EXPECT_FALSE(ks_two_sample(big, small).rejects_at_1pct());
}

TEST(LocalTimeSup, DegenerateAndMonotoneInRadius) {
  const auto zero = make_path(std::vector<double>(1025, 0.0), 1.0 / 1024.0);
  const std::vector<double> xs{0.0};
  const double r = 1.0 / 16.0;
  EXPECT_NEAR(local_time_sup(zero, {0.0, 1.0}, r, 0.01, xs), 2.0 * r / 0.02, 1e-9);

  const auto path = simulate_path(RosenblattParams{HurstParam(0.7), 1 << 12, 1.0}, 23);
  const auto grid = level_grid(-3.0, 3.0, 0.01);
  const std::vector<double> centre{0.5};
  double prev = 0.0;
  for (double radius : {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4}) {
    const double v = local_time_sup(path, {0.0, 1.0}, radius, 0.01, grid, centre);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(ImagePoints, CountsNodes) {
  const auto path = make_path({0.0, 1.0, 2.0, 3.0, 4.0});
  EXPECT_TRUE(image_points(path, IntervalSet{}).empty());
  const auto cell = image_points(path, IntervalSet::from_unsorted({{0.1, 0.2}}));
  EXPECT_EQ(cell, std::vector<double>({1.0, 2.0}));
  const auto set = IntervalSet::from_unsorted({{0.0, 0.1}, {0.25, 0.4}});
  EXPECT_EQ(image_points(path, set).size(), nodes_in(path, set).size());
  EXPECT_EQ(image_points(path, set), std::vector<double>({0.0, 1.0, 3.0, 4.0}));
}
