#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace covpack {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Thrown when an exact computation would exceed a configured enumeration
/// budget. Budgets are hard limits; nothing is ever silently truncated.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed experiment configuration (unknown keys, bad values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "num/den" or "num" into a canonical rational. Whitespace around
/// tokens is accepted; anything else is rejected.
Rational parse_rational(const std::string& text);

/// Formats a rational as "num/den" ("num" when the denominator is 1).
std::string format_rational(const Rational& r);

/// log2 of a nonnegative rational; -inf for zero. Works far outside the
/// double range via mpz_get_d_2exp.
double log2_rational(const Rational& r);
double log2_bigint(const BigInt& v);

/// Shortest round-trip decimal formatting; keeps CSV output byte-stable.
std::string format_double(double v);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Log-domain probability: log2(p) <= 0, -inf encodes p == 0.
struct LogProb {
  double log2_value = kNegInf;

  static LogProb from_linear(double p);
  double to_linear() const;
};

/// Streaming log2-domain accumulator for sums of probabilities:
/// rescales against the running maximum so tiny and huge terms coexist.
class Log2Sum {
 public:
  void add_log2(double term);
  bool empty() const { return empty_; }
  /// log2 of the accumulated sum; -inf when nothing (or only zeros) added.
  double value() const;

 private:
  double max_ = kNegInf;
  double scaled_sum_ = 0.0;  // sum of 2^(term - max_)
  bool empty_ = true;
};

enum class ArithMode { exact, log, auto_select };

ArithMode parse_arith_mode(const std::string& name);
std::string arith_mode_name(ArithMode m);

/// Arithmetic policy: which representation exact computations use and how
/// large enumerations may grow before they are refused.
struct ArithPolicy {
  ArithMode mode = ArithMode::auto_select;
  std::uint64_t joint_type_budget = 1'000'000;
  std::uint64_t class_budget = 1'000'000;
  /// Largest exponent kept in exact rational powers before degrading to log.
  std::uint64_t exact_pow_limit = 1u << 16;
  /// auto mode switches to log-domain beyond this block length.
  std::int64_t exact_max_n = 64;

  bool wants_exact(std::int64_t n) const {
    if (mode == ArithMode::exact) return true;
    if (mode == ArithMode::log) return false;
    return n <= exact_max_n;
  }
};

/// A probability carried either as an exact rational or as a log2 double,
/// chosen by the arithmetic policy at the computation site.
class Prob {
 public:
  Prob() : exact_(true), rational_(0) {}

  static Prob from_rational(Rational r);
  static Prob from_log2(double log2_value);
  static Prob zero(bool exact = true);
  static Prob one(bool exact = true);

  bool is_exact() const { return exact_; }
  bool is_zero() const;
  bool is_one() const;

  /// Exact value; throws std::logic_error on a log-domain Prob.
  const Rational& rational() const;
  /// log2 of the probability, valid for both representations.
  double log2() const;
  double to_double() const;

  /// this^k. Exact powers are kept exact only while the exponent is at most
  /// policy.exact_pow_limit; beyond that the result degrades to log domain.
  Prob pow(const BigInt& exponent, const ArithPolicy& policy) const;

  /// 1 - this; exact path only (log-domain complements lose precision).
  Prob complement() const;

  /// "num/den" for exact values, shortest decimal for log-domain values.
  std::string str() const;

 private:
  bool exact_;
  Rational rational_;
  double log2_ = kNegInf;
};

/// FNV-1a 64-bit, used for RNG stream labels and config hashing.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 1469598103934665603ull);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace covpack
