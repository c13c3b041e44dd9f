#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "covpack/exact.hpp"

namespace covpack {

/// Deterministic random stream. Streams are derived, never shared: every
/// Monte Carlo trial, probe, or grid cell owns a stream keyed by
/// (master seed, purpose label, coordinates), so results do not depend on
/// scheduling or thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static RngStream derive(std::uint64_t master, std::string_view label,
                          std::initializer_list<std::uint64_t> coords = {});

  std::uint64_t next_u64() { return engine_(); }

  /// Unbiased integer in [0, n) via rejection; n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Unbiased big integer in [0, n); n must be positive.
  BigInt below_big(const BigInt& n);

  /// Uniform double in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return real01() < p; }

  /// Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; the mixing step behind stream derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace covpack
