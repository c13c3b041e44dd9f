#include "covpack/distortion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "covpack/parallel.hpp"

namespace covpack {

AdditiveDistortion::AdditiveDistortion(
    std::vector<std::vector<Rational>> per_letter, std::string name)
    : entries_(std::move(per_letter)), name_(std::move(name)) {
  if (entries_.empty() || entries_[0].empty())
    throw std::invalid_argument("empty distortion matrix");
  const std::size_t cols = entries_[0].size();
  scale_ = 1;
  for (auto& row : entries_) {
    if (row.size() != cols)
      throw std::invalid_argument("ragged distortion matrix");
    for (auto& e : row) {
      if (sgn(e) < 0)
        throw std::invalid_argument("distortion entries must be nonnegative");
      e.canonicalize();
      mpz_lcm(scale_.get_mpz_t(), scale_.get_mpz_t(), e.get_den().get_mpz_t());
    }
  }
  scaled_.assign(entries_.size(), std::vector<std::int64_t>(cols, 0));
  for (std::size_t x = 0; x < entries_.size(); ++x) {
    for (std::size_t y = 0; y < cols; ++y) {
      Rational v = entries_[x][y] * Rational(scale_);
      v.canonicalize();
      BigInt iv(v.get_num());
      // Scaled entries accumulate over blocks of ~2^20 letters at most;
      // keep headroom in 64-bit sums.
      if (!iv.fits_slong_p() || iv.get_si() > (std::int64_t{1} << 40))
        throw std::invalid_argument("distortion entry too large when scaled");
      scaled_[x][y] = iv.get_si();
    }
  }
}

AdditiveDistortion AdditiveDistortion::hamming(int x_size, int y_size) {
  std::vector<std::vector<Rational>> m(x_size, std::vector<Rational>(y_size));
  for (int x = 0; x < x_size; ++x)
    for (int y = 0; y < y_size; ++y) m[x][y] = Rational(x == y ? 0 : 1);
  return AdditiveDistortion(std::move(m), "hamming");
}

Rational AdditiveDistortion::evaluate(std::span<const Symbol> x,
                                      std::span<const Symbol> y) const {
  if (x.size() != y.size())
    throw std::invalid_argument("distortion of blocks with different lengths");
  return Rational(BigInt(scaled_total(x, y))) / Rational(scale_);
}

std::int64_t AdditiveDistortion::scaled_total(std::span<const Symbol> x,
                                              std::span<const Symbol> y) const {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) total += scaled_[x[i]][y[i]];
  return total;
}

std::int64_t AdditiveDistortion::scaled_total(const JointType& j) const {
  std::int64_t total = 0;
  for (int x = 0; x < j.x_size(); ++x)
    for (int y = 0; y < j.y_size(); ++y)
      total += j.counts[x][y] * scaled_[x][y];
  return total;
}

Rational AdditiveDistortion::max_entry() const {
  Rational m = entries_[0][0];
  for (const auto& row : entries_)
    for (const auto& e : row) m = std::max(m, e);
  return m;
}

ExcessThreshold::ExcessThreshold(const AdditiveDistortion& d, std::int64_t n,
                                 const Rational& D) {
  if (sgn(D) < 0) throw std::invalid_argument("distortion level D must be >= 0");
  limit_ = Rational(BigInt(n)) * D * Rational(d.scale());
  limit_.canonicalize();
}

bool ExcessThreshold::exceeds(std::int64_t scaled_total) const {
  return Rational(BigInt(scaled_total)) > limit_;
}

namespace {

void require_additive_shapes(const TypeVector& p, const TypeVector& q,
                             const Distortion& d) {
  if (p.alphabet_size() != d.x_size() || q.alphabet_size() != d.y_size())
    throw std::invalid_argument("distortion matrix shape does not match types");
}

/// Exact or log-domain sum of pair counts split at the threshold.
ExcessSplit joint_type_split(const TypeVector& p, const TypeVector& q,
                             const Rational& D, const AdditiveDistortion& d,
                             const ArithPolicy& policy) {
  const ExcessThreshold threshold(d, p.n, D);
  if (policy.wants_exact(p.n)) {
    BigInt sum_gt(0), sum_le(0);
    for_each_joint_type(p, q, policy.joint_type_budget, [&](const JointType& j) {
      const BigInt pairs = pairs_with_joint_type(j);
      if (threshold.exceeds(d.scaled_total(j)))
        sum_gt += pairs;
      else
        sum_le += pairs;
    });
    const BigInt total = type_class_size(p) * type_class_size(q);
    if (sum_gt + sum_le != total)
      throw std::logic_error("joint types do not partition the pair space");
    return {Prob::from_rational(Rational(sum_gt) / Rational(total)),
            Prob::from_rational(Rational(sum_le) / Rational(total))};
  }
  Log2Sum acc_gt, acc_le;
  for_each_joint_type(p, q, policy.joint_type_budget, [&](const JointType& j) {
    const double lw = log2_pairs_with_joint_type(j);
    if (threshold.exceeds(d.scaled_total(j)))
      acc_gt.add_log2(lw);
    else
      acc_le.add_log2(lw);
  });
  const double log2_total = log2_type_class_size(p) + log2_type_class_size(q);
  return {Prob::from_log2(acc_gt.value() - log2_total),
          Prob::from_log2(acc_le.value() - log2_total)};
}

Prob class_enumeration_excess(const TypeVector& cls, std::span<const Symbol> fixed,
                              bool fixed_is_y, const Rational& D,
                              const Distortion& d, std::uint64_t budget) {
  const std::int64_t n = cls.n;
  BigInt hits(0);
  std::uint64_t total = 0;
  if (const auto* add = dynamic_cast<const AdditiveDistortion*>(&d)) {
    const ExcessThreshold threshold(*add, n, D);
    total = for_each_in_class(cls, budget, [&](const Sequence& member) {
      const std::int64_t t = fixed_is_y ? add->scaled_total(member, fixed)
                                        : add->scaled_total(fixed, member);
      if (threshold.exceeds(t)) ++hits;
    });
  } else {
    Rational limit = Rational(BigInt(n)) * D;
    total = for_each_in_class(cls, budget, [&](const Sequence& member) {
      const Rational t = fixed_is_y ? d.evaluate(member, fixed)
                                    : d.evaluate(fixed, member);
      if (t > limit) ++hits;
    });
  }
  return Prob::from_rational(Rational(hits) / Rational(BigInt(total)));
}

}  // namespace

ExcessSplit excess_split_both_random(const TypeVector& p, const TypeVector& q,
                                     const Rational& D, const Distortion& d,
                                     const ArithPolicy& policy) {
  if (p.n != q.n) throw std::invalid_argument("type block lengths differ");
  const auto* add = dynamic_cast<const AdditiveDistortion*>(&d);
  if (add != nullptr) {
    require_additive_shapes(p, q, d);
    return joint_type_split(p, q, D, *add, policy);
  }
  // Non-additive distortions only support the double-enumeration path.
  const BigInt space = type_class_size(p) * type_class_size(q);
  if (space > policy.class_budget)
    throw BudgetError("pair space too large for non-additive distortion: " +
                      space.get_str());
  const Rational limit = Rational(BigInt(p.n)) * D;
  BigInt gt(0), total(0);
  for_each_in_class(p, policy.class_budget, [&](const Sequence& u) {
    for_each_in_class(q, policy.class_budget, [&](const Sequence& v) {
      ++total;
      if (d.evaluate(u, v) > limit) ++gt;
    });
  });
  return {Prob::from_rational(Rational(gt) / Rational(total)),
          Prob::from_rational(Rational(total - gt) / Rational(total))};
}

Prob excess_prob_both_random(const TypeVector& p, const TypeVector& q,
                             const Rational& D, const Distortion& d,
                             const ArithPolicy& policy) {
  return excess_split_both_random(p, q, D, d, policy).gt;
}

Prob excess_prob_fixed_y(const TypeVector& p, std::span<const Symbol> y,
                         const Rational& D, const Distortion& d,
                         const ArithPolicy& policy) {
  if (p.n != static_cast<std::int64_t>(y.size()))
    throw std::invalid_argument("block length mismatch");
  if (type_class_size(p) <= policy.class_budget)
    return class_enumeration_excess(p, y, true, D, d, policy.class_budget);
  if (!d.is_additive())
    throw BudgetError(
        "type class exceeds enumeration budget and the distortion is not "
        "additive");
  const TypeVector q = type_of(y, d.y_size());
  return excess_split_both_random(p, q, D, d, policy).gt;
}

Prob excess_prob_fixed_u(std::span<const Symbol> u, const TypeVector& q,
                         const Rational& D, const Distortion& d,
                         const ArithPolicy& policy) {
  if (q.n != static_cast<std::int64_t>(u.size()))
    throw std::invalid_argument("block length mismatch");
  if (type_class_size(q) <= policy.class_budget)
    return class_enumeration_excess(q, u, false, D, d, policy.class_budget);
  if (!d.is_additive())
    throw BudgetError(
        "type class exceeds enumeration budget and the distortion is not "
        "additive");
  const TypeVector p = type_of(u, d.x_size());
  return excess_split_both_random(p, q, D, d, policy).gt;
}

BigInt ball_cardinality(std::span<const Symbol> y, const TypeVector& p,
                        const Rational& D, const Distortion& d,
                        std::uint64_t class_budget) {
  if (p.n != static_cast<std::int64_t>(y.size()))
    throw std::invalid_argument("block length mismatch");
  BigInt count(0);
  if (const auto* add = dynamic_cast<const AdditiveDistortion*>(&d)) {
    const ExcessThreshold threshold(*add, p.n, D);
    for_each_in_class(p, class_budget, [&](const Sequence& u) {
      if (threshold.exceeds(add->scaled_total(u, y))) ++count;
    });
  } else {
    const Rational limit = Rational(BigInt(p.n)) * D;
    for_each_in_class(p, class_budget, [&](const Sequence& u) {
      if (d.evaluate(u, y) > limit) ++count;
    });
  }
  return count;
}

DualityReport check_duality(const TypeVector& p, const TypeVector& q,
                            const Rational& D, const Distortion& d,
                            int probe_count, RngStream& rng,
                            const ArithPolicy& policy) {
  if (probe_count < 1) throw std::invalid_argument("probe_count must be >= 1");
  ArithPolicy exact_policy = policy;
  exact_policy.mode = ArithMode::exact;

  DualityReport report;
  report.n = p.n;
  report.p = p;
  report.q = q;
  report.D = D;
  report.probes = probe_count;
  report.both_random =
      excess_prob_both_random(p, q, D, d, exact_policy).rational();

  bool equal = true;
  for (int i = 0; i < probe_count; ++i) {
    const Sequence y = sample_uniform(q, rng);
    const Rational lhs = excess_prob_fixed_y(p, y, D, d, exact_policy).rational();
    if (i == 0) report.lhs = lhs;
    equal = equal && lhs == report.both_random;
  }
  for (int i = 0; i < probe_count; ++i) {
    const Sequence u = sample_uniform(p, rng);
    const Rational rhs = excess_prob_fixed_u(u, q, D, d, exact_policy).rational();
    if (i == 0) report.rhs = rhs;
    equal = equal && rhs == report.both_random;
  }
  report.equal = equal && report.lhs == report.rhs;
  return report;
}

McEstimate excess_prob_mc(const TypeVector& p, const TypeVector& q,
                          const Rational& D, const Distortion& d,
                          std::uint64_t trials, std::uint64_t seed,
                          int threads) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const auto* add = dynamic_cast<const AdditiveDistortion*>(&d);
  std::unique_ptr<ExcessThreshold> threshold;
  if (add != nullptr)
    threshold = std::make_unique<ExcessThreshold>(*add, p.n, D);
  const Rational limit = Rational(BigInt(p.n)) * D;

  std::vector<std::uint8_t> outcome(trials, 0);
  parallel_for_indexed(trials, threads, [&](std::uint64_t t) {
    RngStream rng = RngStream::derive(seed, "excess.mc", {t});
    const Sequence u = sample_uniform(p, rng);
    const Sequence v = sample_uniform(q, rng);
    const bool excess = add != nullptr
                            ? threshold->exceeds(add->scaled_total(u, v))
                            : d.evaluate(u, v) > limit;
    outcome[t] = excess ? 1 : 0;
  });
  McEstimate est;
  est.trials = trials;
  for (std::uint8_t o : outcome) est.hits += o;
  return est;
}

}  // namespace covpack
