#pragma once

#include <optional>
#include <vector>

#include "covpack/distortion.hpp"
#include "covpack/stats.hpp"
#include "covpack/type_lab.hpp"

namespace covpack {

/// 2^floor(n*R) with a minimum of 1.
BigInt codebook_size(std::int64_t n, double rate);

struct CoveringConfig {
  TypeVector p;
  /// Codeword type; empty means sweep every achievable type and simulate
  /// the analytically best one.
  std::optional<TypeVector> q;
  Rational D;
  double rate = 0.0;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  ArithPolicy policy;
  /// Simulation materializes codebooks; refuse sizes beyond this.
  std::uint64_t max_materialized_codebook = std::uint64_t{1} << 20;
};

struct QTableRow {
  TypeVector q;
  Prob excess;  // Pr(d(U, V_q)/n > D)
};

struct CoveringResult {
  TypeVector q;        // codeword type actually simulated
  BigInt codebook;     // number of codewords
  McEstimate failures; // empirical encode-failure frequency
  Prob analytic;       // excess^codebook, the per-word failure probability
  std::vector<QTableRow> q_table;  // filled when sweeping
};

/// Per trial: a fresh codebook of independent uniform type-q codewords and
/// a fresh source word uniform on T_p; the trial fails iff no codeword is
/// within normalized distortion D.
CoveringResult simulate_covering(const CoveringConfig& cfg, const Distortion& d);

/// Failure probability of one source word against an independent codebook:
/// excess_prob_both_random(p, q, D)^codebook.
Prob analytic_failure(const TypeVector& p, const TypeVector& q, const Rational& D,
                      const Distortion& d, const BigInt& codebook,
                      const ArithPolicy& policy = {});

struct BestQ {
  TypeVector q;
  Prob excess;   // A = inf over q of Pr(d/n > D)
  Prob covered;  // 1 - A, kept first-class for log-domain accuracy
};

/// Minimizes the excess probability over every achievable codeword type;
/// ties break to the lexicographically smallest count vector.
BestQ best_q(const TypeVector& p, const Rational& D, const Distortion& d,
             const ArithPolicy& policy = {}, int threads = 1);

/// Finite-blocklength rate exponent -(1/n) log2(1 - A_n) = (1/n) log2 beta.
/// +infinity when no codeword type ever lands within distortion D.
double rate_exponent(const TypeVector& p, const Rational& D, const Distortion& d,
                     const ArithPolicy& policy = {}, int threads = 1);

}  // namespace covpack
