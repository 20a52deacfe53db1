#pragma once

// One-dimensional mode seeking over pooled focal-length roots.
//
// Median-Shift moves a point to the median of the pool values inside its
// window until it stops; it never leaves the pool. The mode with the largest
// basin is then refined by Gaussian mean-shift on the kernel density. Kernel
// voting, the global maximum of the same density on a grid, is the baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "twoac/error.hpp"
#include "twoac/solver.hpp"

namespace twoac {

struct SelectionConfig {
  double bandwidth = 10.0;
  int max_iterations = 100;
  // Convergence tolerance as a fraction of the bandwidth.
  double tolerance_scale = 1e-6;

  double tolerance() const { return tolerance_scale * bandwidth; }
  void validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
    }
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "iteration cap must be at least 1");
  }
};

struct PoolEntry {
  double focal = 0.0;
  // Coordinate in the voting domain: the focal itself or its relative error.
  double value = 0.0;
  std::size_t sample = 0;
  CandidateSolution candidate;
};

struct CandidatePool {
  std::vector<PoolEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(entries.size());
    for (const PoolEntry& e : entries) v.push_back(e.value);
    return v;
  }
};

namespace detail {

inline void require_nonempty(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyPool, "candidate pool is empty");
}

inline double gaussian(double u) {
  constexpr double norm = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;  // 1 / sqrt(2 pi)
  return norm * std::exp(-0.5 * u * u);
}

// Lower-middle element of a sorted range.
inline double lower_median(std::span<const double> sorted) { return sorted[(sorted.size() - 1) / 2]; }

// [first, last) indices of sorted values within [x - h, x + h].
inline std::pair<std::size_t, std::size_t> window(std::span<const double> sorted, double x, double h) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - h);
  const auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + h);
  return {static_cast<std::size_t>(lo - sorted.begin()), static_cast<std::size_t>(hi - sorted.begin())};
}

}  // namespace detail

// In one dimension the halfspace-deepest point is the ordinary median; an
// even count yields the lower-middle element so the result is always a pool
// member.
inline double tukey_median(std::span<const double> values) {
  detail::require_nonempty(values);
  std::vector<double> v(values.begin(), values.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Kernel density f(x) = sum_i k((x_i - x) / h) / h with a standard normal k.
inline double kde(std::span<const double> values, double x, double h) {
  double acc = 0.0;
  for (double xi : values) acc += detail::gaussian((xi - x) / h);
  return acc / h;
}

// Every pool value is a starting point; each converges to a mode (or a
// cycle, whose smallest member stands for it). The mode reached from the most
// starts wins; ties go to the larger window population, then the smaller
// value.
inline double median_shift(std::span<const double> values, const SelectionConfig& cfg = {}) {
  detail::require_nonempty(values);
  cfg.validate();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = cfg.bandwidth;

  auto step = [&](double x) {
    const auto [lo, hi] = detail::window(sorted, x, h);
    return detail::lower_median(std::span<const double>(sorted).subspan(lo, hi - lo));
  };

  struct Basin {
    double mode;
    std::size_t starts;
    std::size_t population;
  };
  std::vector<Basin> basins;

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // Duplicates share a trajectory.
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      ++basins.back().starts;
      continue;
    }
    std::vector<double> path{sorted[i]};
    bool cycled = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      const double next = step(path.back());
      if (next == path.back()) break;
      const auto seen = std::find(path.begin(), path.end(), next);
      if (seen != path.end()) {
        path.erase(path.begin(), seen);
        cycled = true;
        break;
      }
      path.push_back(next);
    }
    const double mode = cycled ? *std::min_element(path.begin(), path.end()) : path.back();

    const auto [lo, hi] = detail::window(sorted, mode, h);
    const auto found =
        std::find_if(basins.begin(), basins.end(), [mode](const Basin& b) { return b.mode == mode; });
    if (found != basins.end()) {
      ++found->starts;
      // Keep the back() bookkeeping for duplicates pointing at this basin.
      std::rotate(found, found + 1, basins.end());
    } else {
      basins.push_back({mode, 1, hi - lo});
    }
  }

  const Basin* best = &basins.front();
  for (const Basin& b : basins) {
    if (b.starts != best->starts) {
      if (b.starts > best->starts) best = &b;
    } else if (b.population != best->population) {
      if (b.population > best->population) best = &b;
    } else if (b.mode < best->mode) {
      best = &b;
    }
  }
  return best->mode;
}

// Gaussian mean-shift from x0: each step moves to the kernel-weighted mean,
// which never decreases the density.
inline double kde_gradient_ascent(double x0, std::span<const double> values, const SelectionConfig& cfg = {}) {
  cfg.validate();
  if (!std::isfinite(x0)) throw Error(ErrorCode::InvalidArgument, "start point must be finite");
  const double h = cfg.bandwidth;
  double x = x0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    double wsum = 0.0, xsum = 0.0;
    for (double xi : values) {
      const double w = detail::gaussian((xi - x) / h);
      wsum += w;
      xsum += w * xi;
    }
    if (!(wsum > 0.0)) return x;
    const double next = xsum / wsum;
    const double moved = std::abs(next - x);
    x = next;
    if (moved < cfg.tolerance()) break;
  }
  return x;
}

// Global maximizer of the density over a grid of step h/10 from the smallest
// to the largest value. Near-equal peaks (within 1e-12 relative) resolve to
// the smaller value.
inline double kernel_voting(std::span<const double> values, const SelectionConfig& cfg = {}) {
  detail::require_nonempty(values);
  cfg.validate();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = cfg.bandwidth;
  const double step = h / 10.0;
  const double lo = sorted.front();
  const auto nodes = static_cast<std::size_t>(std::floor((sorted.back() - lo) / step)) + 1;

  // Only values within 8h contribute measurably; far grid nodes are skipped.
  const double reach = 8.0 * h;
  double best_x = lo;
  double best_f = -1.0;
  std::size_t k = 0;
  while (k < nodes) {
    const double x = lo + static_cast<double>(k) * step;
    const auto [first, last] = detail::window(sorted, x, reach);
    if (first == last) {
      // Jump to the first node that can see the next value.
      const double target = sorted[first] - reach;
      k = std::max(k + 1, static_cast<std::size_t>(std::ceil((target - lo) / step)));
      continue;
    }
    double f = 0.0;
    for (std::size_t i = first; i < last; ++i) f += detail::gaussian((sorted[i] - x) / h);
    f /= h;
    if (f > best_f * (1.0 + 1e-12)) {
      best_f = f;
      best_x = x;
    }
    ++k;
  }
  return best_x;
}

inline double median_shift(const CandidatePool& pool, const SelectionConfig& cfg = {}) {
  return median_shift(pool.values(), cfg);
}
inline double kde_gradient_ascent(double x0, const CandidatePool& pool, const SelectionConfig& cfg = {}) {
  return kde_gradient_ascent(x0, pool.values(), cfg);
}
inline double kernel_voting(const CandidatePool& pool, const SelectionConfig& cfg = {}) {
  return kernel_voting(pool.values(), cfg);
}

}  // namespace twoac
