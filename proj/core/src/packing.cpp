#include "covpack/packing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "covpack/parallel.hpp"

namespace covpack {

DmcChannel::DmcChannel(std::vector<std::vector<double>> w, std::string name)
    : w_(std::move(w)), name_(std::move(name)) {
  if (w_.empty() || w_[0].empty())
    throw std::invalid_argument("empty channel matrix");
  const std::size_t cols = w_[0].size();
  for (const auto& row : w_) {
    if (row.size() != cols) throw std::invalid_argument("ragged channel matrix");
    double sum = 0.0;
    for (double v : row) {
      if (v < 0.0) throw std::invalid_argument("negative channel probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("channel rows must sum to 1");
  }
}

DmcChannel DmcChannel::identity(int size) {
  std::vector<std::vector<double>> w(size, std::vector<double>(size, 0.0));
  for (int i = 0; i < size; ++i) w[i][i] = 1.0;
  return DmcChannel(std::move(w), "identity");
}

DmcChannel DmcChannel::bsc(double flip) {
  if (flip < 0.0 || flip > 1.0)
    throw std::invalid_argument("flip probability out of [0,1]");
  return DmcChannel({{1.0 - flip, flip}, {flip, 1.0 - flip}},
                    "bsc(" + format_double(flip) + ")");
}

Sequence DmcChannel::transmit(std::span<const Symbol> x, RngStream& rng) const {
  Sequence y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& row = w_.at(x[i]);
    double r = rng.real01();
    Symbol out = static_cast<Symbol>(row.size() - 1);
    for (std::size_t s = 0; s < row.size(); ++s) {
      if (r < row[s]) {
        out = static_cast<Symbol>(s);
        break;
      }
      r -= row[s];
    }
    y[i] = out;
  }
  return y;
}

BallChannel::BallChannel(AdditiveDistortion d, Rational d_inner)
    : d_(std::move(d)), d_inner_(std::move(d_inner)) {
  if (sgn(d_inner_) < 0)
    throw std::invalid_argument("ball radius must be nonnegative");
}

Sequence BallChannel::transmit(std::span<const Symbol> x, RngStream& rng) const {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  // Integer budget: scaled distortions are integers, so the ball condition
  // total <= n * d_inner * scale is total <= floor(...).
  Rational budget_r = Rational(BigInt(n)) * d_inner_ * Rational(d_.scale());
  BigInt budget_i;
  mpz_fdiv_q(budget_i.get_mpz_t(), budget_r.get_num().get_mpz_t(),
             budget_r.get_den().get_mpz_t());
  if (sgn(budget_i) < 0) throw std::domain_error("empty distortion ball");
  if (!budget_i.fits_slong_p() ||
      budget_i.get_si() > (std::int64_t{1} << 22) / std::max<std::int64_t>(n, 1))
    throw BudgetError("ball-channel dynamic program too large");
  const std::int64_t budget = budget_i.get_si();
  const int ys = d_.y_size();

  // suffix_count[i][b] = number of suffixes y[i..n) with total cost <= b.
  std::vector<std::vector<BigInt>> suffix_count(
      n + 1, std::vector<BigInt>(budget + 1));
  for (std::int64_t b = 0; b <= budget; ++b) suffix_count[n][b] = 1;
  for (std::int64_t i = n - 1; i >= 0; --i) {
    for (std::int64_t b = 0; b <= budget; ++b) {
      BigInt total(0);
      for (int y = 0; y < ys; ++y) {
        const std::int64_t c = d_.scaled(x[i], y);
        if (c <= b) total += suffix_count[i + 1][b - c];
      }
      suffix_count[i][b] = total;
    }
  }
  if (sgn(suffix_count[0][budget]) == 0)
    throw std::domain_error("empty distortion ball");

  Sequence out(n);
  std::int64_t b = budget;
  BigInt r = rng.below_big(suffix_count[0][budget]);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int y = 0; y < ys; ++y) {
      const std::int64_t c = d_.scaled(x[i], y);
      if (c > b) continue;
      const BigInt& w = suffix_count[i + 1][b - c];
      if (r < w) {
        out[i] = static_cast<Symbol>(y);
        b -= c;
        break;
      }
      r -= w;
    }
  }
  return out;
}

RepetitionChannel::RepetitionChannel(std::shared_ptr<const ChannelModel> inner,
                                     int repeat)
    : inner_(std::move(inner)), repeat_(repeat) {
  if (repeat_ < 1) throw std::invalid_argument("repeat must be >= 1");
}

std::string RepetitionChannel::name() const {
  return repeat_ == 1 ? inner_->name()
                      : inner_->name() + " x" + std::to_string(repeat_);
}

Sequence RepetitionChannel::transmit(std::span<const Symbol> x,
                                     RngStream& rng) const {
  if (repeat_ == 1) return inner_->transmit(x, rng);
  Sequence expanded;
  expanded.reserve(x.size() * repeat_);
  for (Symbol s : x) expanded.insert(expanded.end(), repeat_, s);
  const Sequence received = inner_->transmit(expanded, rng);
  Sequence out(x.size());
  std::vector<std::int64_t> votes(inner_->y_size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (int r = 0; r < repeat_; ++r) ++votes[received[i * repeat_ + r]];
    out[i] = static_cast<Symbol>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

DistortionProfile estimate_omega(const ChannelModel& ch, const TypeVector& p,
                                 const Rational& D, const Distortion& d,
                                 std::uint64_t trials, std::uint64_t seed,
                                 int threads) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const auto* add = dynamic_cast<const AdditiveDistortion*>(&d);
  std::unique_ptr<ExcessThreshold> threshold;
  if (add != nullptr) threshold = std::make_unique<ExcessThreshold>(*add, p.n, D);
  const Rational limit = Rational(BigInt(p.n)) * D;

  std::vector<std::uint8_t> excess(trials, 0);
  parallel_for_indexed(trials, threads, [&](std::uint64_t t) {
    RngStream rng = RngStream::derive(seed, "omega.trial", {t});
    const Sequence u = sample_uniform(p, rng);
    const Sequence y = ch.transmit(u, rng);
    excess[t] = (add != nullptr ? threshold->exceeds(add->scaled_total(u, y))
                                : d.evaluate(u, y) > limit)
                    ? 1
                    : 0;
  });
  DistortionProfile profile;
  profile.n = p.n;
  profile.D = D;
  profile.omega.trials = trials;
  for (std::uint8_t e : excess) profile.omega.hits += e;
  return profile;
}

namespace {

enum class Outcome : std::uint8_t { correct, wrong_unique, none_typical, ambiguous };

Outcome classify(bool transmitted_typical, std::uint64_t impostors) {
  if (transmitted_typical)
    return impostors == 0 ? Outcome::correct : Outcome::ambiguous;
  if (impostors == 0) return Outcome::none_typical;
  return impostors == 1 ? Outcome::wrong_unique : Outcome::ambiguous;
}

/// Pr(N = 0) and Pr(N = 1) for N ~ Binomial(m, s), computed through
/// log1p(-s) so probabilities survive s values far below double epsilon.
struct ImpostorLaw {
  double p0 = 1.0;
  double p1 = 0.0;

  static ImpostorLaw from(double m, double s) {
    ImpostorLaw law;
    if (m <= 0.0) return law;
    if (s <= 0.0) return law;
    if (s >= 1.0) return ImpostorLaw{0.0, m == 1.0 ? 1.0 : 0.0};
    const double ln1ms = std::log1p(-s);
    law.p0 = std::exp(m * ln1ms);
    law.p1 = std::exp(std::log(m) + std::log(s) + (m - 1.0) * ln1ms);
    return law;
  }
};

}  // namespace

PackingResult simulate_packing(const ChannelModel& ch, const PackingConfig& cfg,
                               const Distortion& d) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  PackingResult result;
  result.n = cfg.p.n;
  result.rate = cfg.rate;
  result.trials = cfg.trials;
  result.codebook = codebook_size(cfg.p.n, cfg.rate);
  result.collapsed = result.codebook > cfg.direct_codebook_limit;

  const auto* add = dynamic_cast<const AdditiveDistortion*>(&d);
  std::unique_ptr<ExcessThreshold> threshold;
  if (add != nullptr)
    threshold = std::make_unique<ExcessThreshold>(*add, cfg.p.n, cfg.D);
  const Rational limit = Rational(BigInt(cfg.p.n)) * cfg.D;
  auto typical = [&](std::span<const Symbol> u, std::span<const Symbol> y) {
    return add != nullptr ? !threshold->exceeds(add->scaled_total(u, y))
                          : !(d.evaluate(u, y) > limit);
  };

  std::vector<std::uint8_t> outcome(cfg.trials, 0);

  if (!result.collapsed) {
    const std::uint64_t codewords = result.codebook.get_ui();
    parallel_for_indexed(cfg.trials, cfg.threads, [&](std::uint64_t t) {
      RngStream rng = RngStream::derive(cfg.seed, "pack.trial", {t});
      const Sequence transmitted = sample_uniform(cfg.p, rng);
      const Sequence y = ch.transmit(transmitted, rng);
      const bool transmitted_typical = typical(transmitted, y);
      std::uint64_t impostors = 0;
      for (std::uint64_t c = 1; c < codewords && impostors < 2; ++c) {
        const Sequence other = sample_uniform(cfg.p, rng);
        if (typical(other, y)) ++impostors;
      }
      outcome[t] = static_cast<std::uint8_t>(
          classify(transmitted_typical, impostors));
    });
  } else {
    if (add == nullptr)
      throw BudgetError(
          "collapsed packing needs an additive distortion for the per-type "
          "typicality probability");
    const double impostor_count =
        mpz_get_d(BigInt(result.codebook - 1).get_mpz_t());
    // s = Pr(d(U, y)/n <= D) depends on y only through its type; cache the
    // impostor law per received type. Single-threaded trial loop keeps the
    // cache simple; the per-trial cost is one map lookup.
    std::map<std::vector<std::int64_t>, ImpostorLaw> law_by_type;
    auto law_for = [&](const TypeVector& q) -> const ImpostorLaw& {
      auto it = law_by_type.find(q.counts);
      if (it == law_by_type.end()) {
        const ExcessSplit split =
            excess_split_both_random(cfg.p, q, cfg.D, d, cfg.policy);
        const double s = split.le.to_double();
        it = law_by_type
                 .emplace(q.counts, ImpostorLaw::from(impostor_count, s))
                 .first;
      }
      return it->second;
    };
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      RngStream rng = RngStream::derive(cfg.seed, "pack.trial", {t});
      const Sequence transmitted = sample_uniform(cfg.p, rng);
      const Sequence y = ch.transmit(transmitted, rng);
      const bool transmitted_typical = typical(transmitted, y);
      const ImpostorLaw& law = law_for(type_of(y, d.y_size()));
      const double r = rng.real01();
      std::uint64_t impostors = 2;
      if (r < law.p0)
        impostors = 0;
      else if (r < law.p0 + law.p1)
        impostors = 1;
      outcome[t] = static_cast<std::uint8_t>(
          classify(transmitted_typical, impostors));
    }
  }

  for (std::uint8_t o : outcome) {
    switch (static_cast<Outcome>(o)) {
      case Outcome::correct: ++result.correct; break;
      case Outcome::wrong_unique: ++result.wrong_unique; break;
      case Outcome::none_typical: ++result.none_typical; break;
      case Outcome::ambiguous: ++result.ambiguous; break;
    }
  }
  return result;
}

BoundCheck bound_check(const PackingResult& result, const Prob& A,
                       const DistortionProfile& omega,
                       const ArithPolicy& policy) {
  BoundCheck check;
  const Prob a_pow = A.pow(result.codebook - 1, policy);
  check.bound = -omega.omega_upper() + a_pow.to_double();
  check.slack = 3.0 * result.correct_estimate().wilson().half_width();
  check.margin = result.correct_rate() - (check.bound - check.slack);
  check.pass = check.margin >= 0.0;
  return check;
}

double achievable_rate_estimate(const TypeVector& p, const Rational& D,
                                const Distortion& d, const ArithPolicy& policy,
                                int threads, double grid_step,
                                double bound_threshold) {
  const BestQ bq = best_q(p, D, d, policy, threads);
  if (bq.excess.is_zero()) return 0.0;
  const double log2_a = bq.excess.log2();
  const double log2_limit = std::log2(bound_threshold);
  const double rate_cap =
      std::log2(static_cast<double>(std::max(2, d.y_size()))) + 0.5;
  double last_ok = 0.0;
  for (int i = 0;; ++i) {
    const double r = static_cast<double>(i) * grid_step;
    if (r > rate_cap + grid_step / 2) break;
    const BigInt exponent = codebook_size(p.n, r) - 1;
    const double log2_bound = mpz_get_d(exponent.get_mpz_t()) * log2_a;
    if (log2_bound >= log2_limit)
      last_ok = r;
    else
      break;  // the bound only decays as the rate grows
  }
  // Report the realized message rate floor(n R)/n: a grid rate whose
  // codebook still has a single codeword carries no information.
  const double realized =
      std::floor(static_cast<double>(p.n) * last_ok + 1e-9) /
      static_cast<double>(p.n);
  return realized;
}

}  // namespace covpack
