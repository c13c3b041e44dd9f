#include <doctest.h>

#include <cmath>
#include <set>

#include "covpack/packing.hpp"
#include "support/brute.hpp"

using namespace covpack;

namespace {

Rational rat(const char* s) { return parse_rational(s); }

TypeVector tv(std::vector<std::int64_t> counts) {
  return TypeVector::from_counts(std::move(counts));
}

const AdditiveDistortion& hamming2() {
  static const AdditiveDistortion d = AdditiveDistortion::hamming(2, 2);
  return d;
}

}  // namespace

TEST_CASE("dmc validation and degenerate channels") {
  CHECK_THROWS_AS(DmcChannel({{0.5, 0.4}}), std::invalid_argument);
  CHECK_THROWS_AS(DmcChannel({{1.2, -0.2}}), std::invalid_argument);

  RngStream rng(3);
  const auto id = DmcChannel::identity(3);
  const Sequence x{0, 2, 1, 1};
  CHECK(id.transmit(x, rng) == x);

  // Every input maps to symbol 1.
  const DmcChannel constant({{0.0, 1.0}, {0.0, 1.0}});
  CHECK(constant.transmit(Sequence{0, 1, 0}, rng) == Sequence{1, 1, 1});
}

TEST_CASE("bsc flips at the configured rate") {
  RngStream rng = RngStream::derive(12, "test.bsc");
  const auto ch = DmcChannel::bsc(0.2);
  const Sequence x(2000, 0);
  std::int64_t flips = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Sequence y = ch.transmit(x, rng);
    for (Symbol s : y) flips += s;
  }
  const double rate = static_cast<double>(flips) / 20000.0;
  CHECK(rate > 0.18);
  CHECK(rate < 0.22);
}

TEST_CASE("ball channel at radius zero is the identity under Hamming") {
  const BallChannel ch(hamming2(), rat("0"));
  RngStream rng(7);
  for (int i = 0; i < 20; ++i) {
    const Sequence x = sample_uniform(tv({2, 2}), rng);
    CHECK(ch.transmit(x, rng) == x);
  }
}

TEST_CASE("ball channel outputs stay inside the ball on all 16 inputs") {
  const BallChannel ch(hamming2(), rat("1/4"));
  RngStream rng = RngStream::derive(4, "test.ball");
  for (int mask = 0; mask < 16; ++mask) {
    Sequence x(4);
    for (int i = 0; i < 4; ++i) x[i] = (mask >> i) & 1;
    std::set<Sequence> support;
    for (int draw = 0; draw < 600; ++draw) {
      const Sequence y = ch.transmit(x, rng);
      CHECK(hamming2().evaluate(x, y) <= rat("1"));  // at most one flip
      support.insert(y);
    }
    // The radius-1 Hamming ball around any 4-bit block has 5 members.
    CHECK(support.size() == 5);
  }
}

TEST_CASE("ball channel at max radius reaches every output block") {
  const BallChannel ch(hamming2(), rat("1"));
  RngStream rng = RngStream::derive(5, "test.ball-max");
  const Sequence x{0, 0};
  std::set<Sequence> support;
  for (int draw = 0; draw < 500; ++draw) support.insert(ch.transmit(x, rng));
  CHECK(support.size() == 4);
}

TEST_CASE("empty balls are rejected") {
  const AdditiveDistortion unit({{rat("1")}}, "unit");
  const BallChannel ch(unit, rat("0"));
  RngStream rng(1);
  CHECK_THROWS_AS(ch.transmit(Sequence{0, 0}, rng), std::domain_error);
}

TEST_CASE("repetition wrapper majority-votes the inner channel") {
  const auto inner = std::make_shared<DmcChannel>(DmcChannel::bsc(0.4));
  const RepetitionChannel wrapped(inner, 5);
  RngStream rng = RngStream::derive(6, "test.rep");
  const Sequence x(500, 1);
  std::int64_t wrong = 0;
  const Sequence y = wrapped.transmit(x, rng);
  REQUIRE(y.size() == x.size());
  for (Symbol s : y)
    if (s != 1) ++wrong;
  // Majority of 5 at flip 0.4: error ~ 0.317; far below the raw 0.4.
  CHECK(wrong < 190);
  CHECK(wrong > 100);
}

TEST_CASE("omega estimates for channels with hard guarantees") {
  const auto& d = hamming2();
  const TypeVector p = tv({2, 2});
  {
    const BallChannel ch(d, rat("1/4"));
    const auto prof = estimate_omega(ch, p, rat("1/4"), d, 2000, 1);
    CHECK(prof.omega.hits == 0);
  }
  {
    const auto ch = DmcChannel::identity(2);
    const auto prof = estimate_omega(ch, p, rat("0"), d, 2000, 2);
    CHECK(prof.omega.hits == 0);
  }
}

TEST_CASE("omega decreases with block length for a mild bsc") {
  const auto& d = hamming2();
  const auto ch = DmcChannel::bsc(0.05);
  double prev = 1.0;
  for (std::int64_t n : {32, 64, 128}) {
    const auto prof = estimate_omega(ch, tv({n / 2, n / 2}), rat("1/5"), d,
                                     100000, 1234);
    CHECK(prof.omega.rate() < prev);
    prev = prof.omega.rate();
  }
  CHECK(prev < 0.001);
}

TEST_CASE("packing with one codeword over a ball channel always decodes") {
  const auto& d = hamming2();
  const BallChannel ch(d, rat("1/4"));
  PackingConfig cfg;
  cfg.p = tv({2, 2});
  cfg.D = rat("1/4");
  cfg.rate = 0.0;
  cfg.trials = 500;
  cfg.seed = 77;
  const PackingResult res = simulate_packing(ch, cfg, d);
  CHECK(res.codebook == 1);
  CHECK(res.correct == res.trials);
  CHECK(res.correct_rate() == 1.0);
}

TEST_CASE("two-codeword identity-channel packing decodes at rate one half") {
  const auto& d = hamming2();
  const auto ch = DmcChannel::identity(2);
  PackingConfig cfg;
  cfg.p = tv({1, 1});
  cfg.D = rat("0");
  cfg.rate = 0.5;  // floor(2 * 0.5) = 1 bit -> 2 codewords
  cfg.trials = 20000;
  cfg.seed = 88;
  const PackingResult res = simulate_packing(ch, cfg, d);
  CHECK(res.codebook == 2);
  CHECK(res.wrong_unique == 0);  // transmitted block always typical at D=0
  CHECK(res.none_typical == 0);
  CHECK(res.correct_estimate().wilson().contains(0.5));
}

TEST_CASE("packing outcome counts always partition the trials") {
  const auto& d = hamming2();
  const auto ch = DmcChannel::bsc(0.2);
  RngStream rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    PackingConfig cfg;
    cfg.p = tv({3, 3});
    cfg.D = brute::ratio(static_cast<std::int64_t>(rng.below(3)), 6);
    cfg.rate = 0.3 * static_cast<double>(rng.below(3));
    cfg.trials = 300;
    cfg.seed = rng.next_u64();
    const PackingResult res = simulate_packing(ch, cfg, d);
    CHECK(res.correct + res.wrong_unique + res.none_typical + res.ambiguous ==
          res.trials);
  }
}

TEST_CASE("collapsed and materialized packing agree in distribution") {
  const auto& d = hamming2();
  const auto ch = DmcChannel::bsc(0.1);
  PackingConfig direct;
  direct.p = tv({4, 4});
  direct.D = rat("1/4");
  direct.rate = 0.25;  // floor(8 * .25) = 2 bits -> 4 codewords
  direct.trials = 40000;
  direct.seed = 404;
  PackingConfig collapsed = direct;
  collapsed.direct_codebook_limit = 1;  // force the binomial path
  const PackingResult a = simulate_packing(ch, direct, d);
  const PackingResult b = simulate_packing(ch, collapsed, d);
  CHECK(!a.collapsed);
  CHECK(b.collapsed);
  // Two independent estimates of the same probabilities: compare within
  // joint 4-sigma Monte Carlo noise.
  const auto close = [&](std::uint64_t x, std::uint64_t y) {
    const double px = static_cast<double>(x) / static_cast<double>(a.trials);
    const double py = static_cast<double>(y) / static_cast<double>(b.trials);
    const double p = (px + py) / 2;
    const double sigma =
        std::sqrt(2.0 * std::max(p * (1 - p), 1e-9) / static_cast<double>(a.trials));
    return std::abs(px - py) <= 4.0 * sigma;
  };
  CHECK(close(a.correct, b.correct));
  CHECK(close(a.wrong_unique, b.wrong_unique));
  CHECK(close(a.none_typical, b.none_typical));
  CHECK(close(a.ambiguous, b.ambiguous));
}

TEST_CASE("bound check on hand-computable instances") {
  const auto& d = hamming2();
  {
    // Ball channel, single codeword: bound = -omega_up + A^0 = 1 - omega_up.
    const BallChannel ch(d, rat("1/4"));
    PackingConfig cfg;
    cfg.p = tv({2, 2});
    cfg.D = rat("1/4");
    cfg.rate = 0.0;
    cfg.trials = 2000;
    cfg.seed = 5;
    const PackingResult res = simulate_packing(ch, cfg, d);
    const auto omega = estimate_omega(ch, cfg.p, cfg.D, d, 2000, 6);
    const Prob A = best_q(cfg.p, cfg.D, d).excess;
    const BoundCheck check = bound_check(res, A, omega);
    CHECK(check.pass);
    CHECK(check.bound == doctest::Approx(1.0 - omega.omega_upper()));
    CHECK(res.correct_rate() == 1.0);
  }
  {
    // Identity channel, two codewords: bound ~= 0 + (1/2)^1.
    const auto ch = DmcChannel::identity(2);
    PackingConfig cfg;
    cfg.p = tv({1, 1});
    cfg.D = rat("0");
    cfg.rate = 0.5;
    cfg.trials = 20000;
    cfg.seed = 15;
    const PackingResult res = simulate_packing(ch, cfg, d);
    const auto omega = estimate_omega(ch, cfg.p, cfg.D, d, 20000, 16);
    const Prob A = best_q(cfg.p, cfg.D, d).excess;
    CHECK(A.rational() == rat("1/2"));
    const BoundCheck check = bound_check(res, A, omega);
    CHECK(check.pass);
    CHECK(check.bound ==
          doctest::Approx(0.5 - omega.omega_upper()).epsilon(1e-9));
  }
}

TEST_CASE("bound check holds across a small grid") {
  const auto& d = hamming2();
  const auto bsc = DmcChannel::bsc(0.05);
  for (std::int64_t n : {2, 4, 8}) {
    const TypeVector p = tv({n / 2, n / 2});
    const auto omega = estimate_omega(bsc, p, rat("1/4"), d, 5000,
                                      splitmix64(900 + n));
    const Prob A = best_q(p, rat("1/4"), d).excess;
    for (double r : {0.0, 0.1, 0.25}) {
      PackingConfig cfg;
      cfg.p = p;
      cfg.D = rat("1/4");
      cfg.rate = r;
      cfg.trials = 5000;
      cfg.seed = splitmix64(1000 + n * 10 + static_cast<int>(r * 100));
      const PackingResult res = simulate_packing(bsc, cfg, d);
      const BoundCheck check = bound_check(res, A, omega);
      CHECK(check.pass);
    }
  }
}

TEST_CASE("correct decoding degrades as the rate grows") {
  const auto& d = hamming2();
  const auto ch = DmcChannel::bsc(0.02);
  const TypeVector p = tv({8, 8});
  std::vector<double> rates;
  for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    PackingConfig cfg;
    cfg.p = p;
    cfg.D = rat("1/8");
    cfg.rate = r;
    cfg.trials = 4000;
    cfg.seed = splitmix64(4242 + static_cast<int>(r * 10));
    rates.push_back(simulate_packing(ch, cfg, d).correct_rate());
  }
  // Paired comparison on the average trend, not per-cell monotonicity.
  double early = (rates[0] + rates[1]) / 2;
  double late = (rates[3] + rates[4]) / 2;
  CHECK(early >= late - 0.02);
  CHECK(rates.front() > rates.back());
}

TEST_CASE("achievable rate estimate") {
  const auto& d = hamming2();
  // A = 0: only the empty-message codebook works.
  CHECK(achievable_rate_estimate(tv({1, 1}), rat("1"), d) == 0.0);
  // n = 2, D = 0: A = 1/2 forces a single-codeword codebook; the realized
  // message rate is 0.
  CHECK(achievable_rate_estimate(tv({1, 1}), rat("0"), d) == 0.0);
}

TEST_CASE("achievable rate tracks the covering exponent at large n") {
  const auto& d = hamming2();
  const TypeVector p = tv({256, 256});
  ArithPolicy policy;  // auto -> log domain at n = 512
  const double alpha = achievable_rate_estimate(p, rat("11/100"), d, policy);
  const double exponent = rate_exponent(p, rat("11/100"), d, policy);
  CHECK(std::abs(alpha - exponent) <= 0.05);
}
