#pragma once

#include <cmath>
#include <cstdint>

namespace covpack {

inline constexpr double kZ95 = 1.959963984540054;

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;

  double half_width() const { return (hi - lo) / 2.0; }
  bool contains(double p) const { return lo <= p && p <= hi; }
};

/// Wilson score interval; well behaved near 0 and 1, unlike Wald.
inline WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials,
                                      double z = kZ95) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double hw = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  double lo = center - hw, hi = center + hw;
  if (lo < 0.0) lo = 0.0;
  if (hi > 1.0) hi = 1.0;
  return {lo, hi};
}

/// A Monte Carlo frequency estimate with its Wilson interval.
struct McEstimate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  double rate() const {
    return trials == 0 ? 0.0
                       : static_cast<double>(hits) / static_cast<double>(trials);
  }
  WilsonInterval wilson(double z = kZ95) const {
    return wilson_interval(hits, trials, z);
  }
};

}  // namespace covpack
