#include "covpack/covering.hpp"

#include <cmath>

#include "covpack/parallel.hpp"

namespace covpack {

BigInt codebook_size(std::int64_t n, double rate) {
  if (rate < 0.0) throw std::invalid_argument("rate must be nonnegative");
  // Nudge before flooring so grid rates like 0.1 stored in binary floating
  // point land on the intended integer.
  const double bits = std::floor(static_cast<double>(n) * rate + 1e-9);
  BigInt size(1);
  mpz_mul_2exp(size.get_mpz_t(), size.get_mpz_t(),
               static_cast<unsigned long>(bits));
  return size;
}

Prob analytic_failure(const TypeVector& p, const TypeVector& q, const Rational& D,
                      const Distortion& d, const BigInt& codebook,
                      const ArithPolicy& policy) {
  return excess_prob_both_random(p, q, D, d, policy).pow(codebook, policy);
}

BestQ best_q(const TypeVector& p, const Rational& D, const Distortion& d,
             const ArithPolicy& policy, int threads) {
  const std::vector<TypeVector> types =
      enumerate_types(d.y_size(), p.n, policy.joint_type_budget);
  std::vector<ExcessSplit> splits(types.size());
  parallel_for_indexed(types.size(), threads, [&](std::uint64_t i) {
    splits[i] = excess_split_both_random(p, types[i], D, d, policy);
  });
  // Sequential scan in lexicographic type order; strict improvement keeps
  // the earliest minimizer.
  std::size_t best = 0;
  for (std::size_t i = 1; i < types.size(); ++i) {
    const bool better =
        splits[i].gt.is_exact() && splits[best].gt.is_exact()
            ? splits[i].gt.rational() < splits[best].gt.rational()
            : splits[i].le.log2() > splits[best].le.log2();
    if (better) best = i;
  }
  return BestQ{types[best], splits[best].gt, splits[best].le};
}

double rate_exponent(const TypeVector& p, const Rational& D, const Distortion& d,
                     const ArithPolicy& policy, int threads) {
  const BestQ bq = best_q(p, D, d, policy, threads);
  if (bq.covered.is_zero()) return std::numeric_limits<double>::infinity();
  return -bq.covered.log2() / static_cast<double>(p.n);
}

CoveringResult simulate_covering(const CoveringConfig& cfg, const Distortion& d) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  CoveringResult result;
  result.codebook = codebook_size(cfg.p.n, cfg.rate);
  if (result.codebook > cfg.max_materialized_codebook)
    throw ConfigError("codebook of " + result.codebook.get_str() +
                      " codewords is too large to materialize; raise the "
                      "limit or lower the rate");

  if (cfg.q.has_value()) {
    result.q = *cfg.q;
  } else {
    const BestQ bq = best_q(cfg.p, cfg.D, d, cfg.policy, cfg.threads);
    const std::vector<TypeVector> types =
        enumerate_types(d.y_size(), cfg.p.n, cfg.policy.joint_type_budget);
    result.q_table.reserve(types.size());
    for (const auto& q : types)
      result.q_table.push_back(
          QTableRow{q, excess_prob_both_random(cfg.p, q, cfg.D, d, cfg.policy)});
    result.q = bq.q;
  }
  if (result.q.n != cfg.p.n)
    throw std::invalid_argument("source and codeword block lengths differ");

  result.analytic =
      analytic_failure(cfg.p, result.q, cfg.D, d, result.codebook, cfg.policy);

  const auto* add = dynamic_cast<const AdditiveDistortion*>(&d);
  std::unique_ptr<ExcessThreshold> threshold;
  if (add != nullptr)
    threshold = std::make_unique<ExcessThreshold>(*add, cfg.p.n, cfg.D);
  const Rational limit = Rational(BigInt(cfg.p.n)) * cfg.D;
  const std::uint64_t codewords = result.codebook.get_ui();

  std::vector<std::uint8_t> failed(cfg.trials, 0);
  parallel_for_indexed(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    RngStream rng = RngStream::derive(cfg.seed, "cover.trial", {t});
    const Sequence u = sample_uniform(cfg.p, rng);
    bool covered = false;
    // Codewords are drawn lazily; the first cover is the lowest-index one.
    for (std::uint64_t c = 0; c < codewords && !covered; ++c) {
      const Sequence y = sample_uniform(result.q, rng);
      covered = add != nullptr ? !threshold->exceeds(add->scaled_total(u, y))
                               : !(d.evaluate(u, y) > limit);
    }
    failed[t] = covered ? 0 : 1;
  });
  result.failures.trials = cfg.trials;
  for (std::uint8_t f : failed) result.failures.hits += f;
  return result;
}

}  // namespace covpack
