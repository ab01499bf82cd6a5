#pragma once

// Shared domain types: Hurst parameter, time grids, sample paths, interval and
// pixel sets, dimension estimates, and the replica seeding contract.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rosefract {

inline constexpr const char *kVersionTag = "rosefract-1.0.0";

class HurstParam {
public:
  explicit HurstParam(double h) : value_(h) {
    if (!(h > 0.5 && h < 1.0)) {
      throw std::domain_error("Hurst parameter must lie in (1/2, 1), got " +
                              std::to_string(h));
    }
  }
  double value() const noexcept { return value_; }

private:
  double value_;
};

enum class GridKind { uniform, geometric };

// Uniform: t_i = t0 + i*dt. Geometric: t_i = t0 * ratio^i.
struct PathGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t n = 1;
  GridKind kind = GridKind::uniform;
  double ratio = 2.0;

  static PathGrid uniform(double t0, double dt, std::size_t n) {
    if (!(dt > 0.0) || n < 1) {
      throw std::domain_error("uniform grid needs dt > 0 and n >= 1");
    }
    return PathGrid{t0, dt, n, GridKind::uniform, 1.0};
  }

  static PathGrid geometric(double t0, double ratio, std::size_t n) {
    if (!(t0 > 0.0) || !(ratio > 1.0) || n < 1) {
      throw std::domain_error("geometric grid needs t0 > 0, ratio > 1, n >= 1");
    }
    return PathGrid{t0, 0.0, n, GridKind::geometric, ratio};
  }

  double time(std::size_t i) const {
    return kind == GridKind::uniform ? t0 + static_cast<double>(i) * dt
                                     : t0 * std::pow(ratio, static_cast<double>(i));
  }
  double horizon() const { return time(n); }
  std::size_t size() const noexcept { return n + 1; }
};

struct SamplePath {
  PathGrid grid;
  std::vector<double> values;
  double hurst = 0.75;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return values.size(); }
  double time(std::size_t i) const { return grid.time(i); }

  void validate() const {
    if (values.size() != grid.size()) {
      throw std::invalid_argument("sample path length does not match its grid");
    }
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("sample path contains a non-finite value");
      }
    }
  }
};

struct Interval {
  double a = 0.0;
  double b = 0.0;
  double length() const noexcept { return b - a; }
  friend bool operator==(const Interval &, const Interval &) = default;
};

// Sorted, disjoint closed intervals. Touching intervals are merged on insertion.
class IntervalSet {
public:
  IntervalSet() = default;

  // Accepts intervals in any order; overlapping or touching ones are merged.
  static IntervalSet from_unsorted(std::vector<Interval> items) {
    for (const auto &iv : items) {
      if (!(iv.a <= iv.b) || !std::isfinite(iv.a) || !std::isfinite(iv.b)) {
        throw std::invalid_argument("interval needs finite a <= b");
      }
    }
    std::sort(items.begin(), items.end(),
              [](const Interval &x, const Interval &y) { return x.a < y.a; });
    IntervalSet out;
    for (const auto &iv : items) {
      out.push_back(iv);
    }
    return out;
  }

  // Append an interval whose start is >= the current last start; merges on overlap.
  void push_back(Interval iv) {
    if (!(iv.a <= iv.b)) {
      throw std::invalid_argument("interval needs a <= b");
    }
    if (!items_.empty()) {
      auto &last = items_.back();
      if (iv.a < last.a) {
        throw std::invalid_argument("IntervalSet::push_back out of order");
      }
      if (iv.a <= last.b) {
        last.b = std::max(last.b, iv.b);
        return;
      }
    }
    items_.push_back(iv);
  }

  const std::vector<Interval> &intervals() const noexcept { return items_; }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t size() const noexcept { return items_.size(); }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  double measure() const noexcept {
    double total = 0.0;
    for (const auto &iv : items_) {
      total += iv.length();
    }
    return total;
  }

  bool contains(double t) const noexcept {
    auto it = std::upper_bound(items_.begin(), items_.end(), t,
                               [](double v, const Interval &iv) { return v < iv.a; });
    if (it == items_.begin()) {
      return false;
    }
    --it;
    return t <= it->b;
  }

  friend bool operator==(const IntervalSet &, const IntervalSet &) = default;

private:
  std::vector<Interval> items_;
};

// Sorted unique non-negative integers k, each standing for the unit cell [k, k+1).
class PixelSet {
public:
  PixelSet() = default;
  explicit PixelSet(std::vector<std::int64_t> cells) : cells_(std::move(cells)) {
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
    if (!cells_.empty() && cells_.front() < 0) {
      throw std::domain_error("pixel cells must be non-negative");
    }
  }

  const std::vector<std::int64_t> &cells() const noexcept { return cells_; }
  bool empty() const noexcept { return cells_.empty(); }
  std::size_t size() const noexcept { return cells_.size(); }
  auto begin() const noexcept { return cells_.begin(); }
  auto end() const noexcept { return cells_.end(); }

  // Cells k with lo <= k < hi.
  std::span<const std::int64_t> range(std::int64_t lo, std::int64_t hi) const {
    auto first = std::lower_bound(cells_.begin(), cells_.end(), lo);
    auto last = std::lower_bound(first, cells_.end(), hi);
    return {first, last};
  }

  friend bool operator==(const PixelSet &, const PixelSet &) = default;

private:
  std::vector<std::int64_t> cells_;
};

struct ScaleRow {
  double scale = 0.0;
  double quantity = 0.0;
  bool used = true;
  std::string note;
};

struct DimensionEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double scale_lo = 0.0;
  double scale_hi = 0.0;
  std::string method;
  std::vector<ScaleRow> diagnostics;
  std::vector<std::string> flags;

  bool has_flag(const std::string &f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
};

// Cell k is included iff [k, k+1) meets the set. Closed intervals ending exactly
// on an integer b include cell b.
inline PixelSet pixelize(const IntervalSet &set) {
  std::vector<std::int64_t> cells;
  for (const auto &iv : set) {
    if (iv.a < 0.0) {
      throw std::domain_error("pixelize: negative endpoint");
    }
    const auto lo = static_cast<std::int64_t>(std::floor(iv.a));
    const auto hi = static_cast<std::int64_t>(std::floor(iv.b));
    for (std::int64_t k = lo; k <= hi; ++k) {
      if (cells.empty() || cells.back() < k) {
        cells.push_back(k);
      }
    }
  }
  return PixelSet(std::move(cells));
}

inline IntervalSet restrict(const IntervalSet &set, double a, double b) {
  if (a > b) {
    throw std::domain_error("restrict: a > b");
  }
  IntervalSet out;
  for (const auto &iv : set) {
    if (iv.b < a) {
      continue;
    }
    if (iv.a > b) {
      break;
    }
    out.push_back({std::max(iv.a, a), std::min(iv.b, b)});
  }
  return out;
}

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
} // namespace detail

// Replica seed: fixed-width avalanche mixing of (master, replica).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica) noexcept {
  return detail::splitmix64(detail::splitmix64(master) ^
                            detail::splitmix64(replica * 0xD1B54A32D192ED03ULL + 1));
}

} // namespace rosefract
