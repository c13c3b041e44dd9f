#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "covpack/exact.hpp"
#include "covpack/rng.hpp"

namespace covpack {

using Symbol = std::int32_t;
using Sequence = std::vector<Symbol>;

/// Finite ordered alphabet; symbols are addressed by index, labels are only
/// for configuration and reports.
class Alphabet {
 public:
  static Alphabet from_labels(std::vector<std::string> labels);
  /// Labels "0", "1", ..., size-1.
  static Alphabet indexed(int size);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }
  int index_of(const std::string& label) const;  // throws if absent

 private:
  std::vector<std::string> labels_;
};

/// Symbol-count composition of a block of length n.
struct TypeVector {
  std::vector<std::int64_t> counts;
  std::int64_t n = 0;

  static TypeVector from_counts(std::vector<std::int64_t> counts);
  int alphabet_size() const { return static_cast<int>(counts.size()); }
  std::string str() const;  // "a:b:c"
  bool operator==(const TypeVector&) const = default;
};

/// Empirical type of a sequence over an alphabet of the given size.
TypeVector type_of(std::span<const Symbol> seq, int alphabet_size);

/// |X| x |Y| count matrix of an aligned pair of blocks.
struct JointType {
  std::vector<std::vector<std::int64_t>> counts;
  std::int64_t n = 0;

  static JointType from_counts(std::vector<std::vector<std::int64_t>> counts);
  int x_size() const { return static_cast<int>(counts.size()); }
  int y_size() const {
    return counts.empty() ? 0 : static_cast<int>(counts[0].size());
  }
  TypeVector row_margin() const;
  TypeVector col_margin() const;
  bool operator==(const JointType&) const = default;
};

JointType joint_type_of(std::span<const Symbol> x, std::span<const Symbol> y,
                        int x_size, int y_size);

/// Bijection on {0..n-1}; applying it to a block preserves the block's type.
class Permutation {
 public:
  static Permutation identity(std::int64_t n);
  static Permutation from_mapping(std::vector<std::int32_t> mapping);
  static Permutation random(std::int64_t n, RngStream& rng);

  std::int64_t size() const { return static_cast<std::int64_t>(map_.size()); }
  std::int32_t operator()(std::int64_t i) const { return map_[i]; }

 private:
  std::vector<std::int32_t> map_;
};

/// out[i] = seq[perm(i)].
Sequence apply_permutation(const Permutation& perm, std::span<const Symbol> seq);

/// Exact rational source distribution together with its lattice constant:
/// the least block length at which the distribution is an exact type.
class RationalPmf {
 public:
  static RationalPmf from_probs(std::vector<Rational> probs);

  const std::vector<Rational>& probs() const { return probs_; }
  std::int64_t n0() const { return n0_; }
  int alphabet_size() const { return static_cast<int>(probs_.size()); }

  /// Exact type at block length n; requires n0 | n.
  TypeVector type_at(std::int64_t n) const;
  std::vector<double> probs_double() const;

 private:
  std::vector<Rational> probs_;
  std::int64_t n0_ = 1;
};

/// Least positive integer making every probability integral when scaled.
/// Rejects inputs that do not sum to exactly 1 or have negative entries.
std::int64_t lattice_constant(const std::vector<Rational>& probs);

/// n! / prod(counts!) as an exact big integer.
BigInt type_class_size(const TypeVector& t);
double log2_type_class_size(const TypeVector& t);

/// n! / prod over all cells of the joint count matrix.
BigInt pairs_with_joint_type(const JointType& j);
double log2_pairs_with_joint_type(const JointType& j);

/// Number of compositions of n into `alphabet_size` nonnegative parts.
BigInt count_types(int alphabet_size, std::int64_t n);

/// All types in lexicographically ascending count order. Refuses when the
/// closed-form count exceeds the budget.
std::vector<TypeVector> enumerate_types(int alphabet_size, std::int64_t n,
                                        std::uint64_t budget = 1'000'000);

/// Visits every nonnegative integer matrix with the given margins, in
/// lexicographic row-major order. Throws BudgetError when more than
/// `budget` matrices would be visited. Returns the number visited.
std::uint64_t for_each_joint_type(const TypeVector& row, const TypeVector& col,
                                  std::uint64_t budget,
                                  const std::function<void(const JointType&)>& fn);

std::vector<JointType> enumerate_joint_types(const TypeVector& row,
                                             const TypeVector& col,
                                             std::uint64_t budget = 1'000'000);

/// The lexicographically smallest member of the type class (sorted block).
Sequence canonical_sequence(const TypeVector& t);

/// Uniform draw from the type class: Fisher-Yates shuffle of the canonical
/// block. O(n).
Sequence sample_uniform(const TypeVector& t, RngStream& rng);

/// Visits every member of the type class in lexicographic order. Refuses
/// up front when the class size exceeds the budget. Returns the count.
std::uint64_t for_each_in_class(const TypeVector& t, std::uint64_t budget,
                                const std::function<void(const Sequence&)>& fn);

}  // namespace covpack
