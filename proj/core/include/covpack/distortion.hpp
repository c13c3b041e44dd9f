#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "covpack/exact.hpp"
#include "covpack/rng.hpp"
#include "covpack/stats.hpp"
#include "covpack/type_lab.hpp"

namespace covpack {

/// Permutation-invariant block distortion. Implementations must satisfy
/// evaluate(pi x, pi y) == evaluate(x, y) for every permutation pi.
class Distortion {
 public:
  virtual ~Distortion() = default;
  virtual Rational evaluate(std::span<const Symbol> x,
                            std::span<const Symbol> y) const = 0;
  virtual bool is_additive() const { return false; }
  virtual int x_size() const = 0;
  virtual int y_size() const = 0;
  virtual std::string name() const = 0;
};

/// Per-letter sum of a nonnegative rational |X| x |Y| matrix.
class AdditiveDistortion final : public Distortion {
 public:
  AdditiveDistortion(std::vector<std::vector<Rational>> per_letter,
                     std::string name = "additive");
  static AdditiveDistortion hamming(int x_size, int y_size);

  Rational evaluate(std::span<const Symbol> x,
                    std::span<const Symbol> y) const override;
  bool is_additive() const override { return true; }
  int x_size() const override { return static_cast<int>(entries_.size()); }
  int y_size() const override {
    return entries_.empty() ? 0 : static_cast<int>(entries_[0].size());
  }
  std::string name() const override { return name_; }

  const Rational& entry(int x, int y) const { return entries_[x][y]; }
  /// Common denominator of all entries; scaled entries are exact integers.
  const BigInt& scale() const { return scale_; }
  std::int64_t scaled(int x, int y) const { return scaled_[x][y]; }
  /// Sum of scaled per-letter values along an aligned pair.
  std::int64_t scaled_total(std::span<const Symbol> x,
                            std::span<const Symbol> y) const;
  /// Sum over cells of count * scaled entry; the block distortion of any
  /// pair with this joint type, times scale().
  std::int64_t scaled_total(const JointType& j) const;
  Rational max_entry() const;

 private:
  std::vector<std::vector<Rational>> entries_;
  std::vector<std::vector<std::int64_t>> scaled_;
  BigInt scale_;
  std::string name_;
};

/// Strict excess test: a pair is atypical iff distortion exceeds n*D;
/// ties at exactly n*D count as typical. The threshold is exact: scaled
/// integer totals compare against the rational n*D*scale.
class ExcessThreshold {
 public:
  ExcessThreshold(const AdditiveDistortion& d, std::int64_t n, const Rational& D);
  bool exceeds(std::int64_t scaled_total) const;

 private:
  Rational limit_;  // n * D * scale
};

/// Complementary pair Pr(d/n > D) and Pr(d/n <= D); the two sides sum to 1.
struct ExcessSplit {
  Prob gt;
  Prob le;
};

/// Pr over independent U uniform on T_p and V uniform on T_q that the
/// normalized distortion exceeds D. Exact path sums pair counts over the
/// joint types with margins (p, q); log path accumulates log2 terms the
/// same way. Requires additive distortion for the joint-type route.
ExcessSplit excess_split_both_random(const TypeVector& p, const TypeVector& q,
                                     const Rational& D, const Distortion& d,
                                     const ArithPolicy& policy = {});

Prob excess_prob_both_random(const TypeVector& p, const TypeVector& q,
                             const Rational& D, const Distortion& d,
                             const ArithPolicy& policy = {});

/// Pr over U uniform on T_p, y fixed. Enumerates the class directly while
/// it fits the budget; otherwise reduces to joint types (additive only).
Prob excess_prob_fixed_y(const TypeVector& p, std::span<const Symbol> y,
                         const Rational& D, const Distortion& d,
                         const ArithPolicy& policy = {});

/// Mirror image: u fixed, V uniform on T_q.
Prob excess_prob_fixed_u(std::span<const Symbol> u, const TypeVector& q,
                         const Rational& D, const Distortion& d,
                         const ArithPolicy& policy = {});

/// |{u in T_p : d(u, y)/n > D}| by direct class enumeration. Two y of the
/// same type always give the same cardinality.
BigInt ball_cardinality(std::span<const Symbol> y, const TypeVector& p,
                        const Rational& D, const Distortion& d,
                        std::uint64_t class_budget = 1'000'000);

/// Exact three-way comparison of the excess probability computed with a
/// fixed reproduction word, a fixed source word, and both blocks random.
struct DualityReport {
  std::int64_t n = 0;
  TypeVector p;
  TypeVector q;
  Rational D;
  Rational lhs;          // fixed y, random U
  Rational rhs;          // fixed u, random V_q
  Rational both_random;  // independent U, V_q
  bool equal = false;
  int probes = 0;
};

/// Samples `probe_count` reproduction words of type q and source words of
/// type p, computes all three probabilities exactly, and reports whether
/// every value agrees as an exact rational.
DualityReport check_duality(const TypeVector& p, const TypeVector& q,
                            const Rational& D, const Distortion& d,
                            int probe_count, RngStream& rng,
                            const ArithPolicy& policy = {});

/// Monte Carlo fallback for instances beyond the exact budgets.
McEstimate excess_prob_mc(const TypeVector& p, const TypeVector& q,
                          const Rational& D, const Distortion& d,
                          std::uint64_t trials, std::uint64_t seed,
                          int threads = 1);

}  // namespace covpack
