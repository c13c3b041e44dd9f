#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "covpack/covering.hpp"
#include "covpack/distortion.hpp"
#include "covpack/stats.hpp"
#include "covpack/type_lab.hpp"

namespace covpack {

/// Black-box block channel: a sequence in, a sequence of equal length out.
/// Implementations are stateless per call; all randomness comes from the
/// supplied stream.
class ChannelModel {
 public:
  virtual ~ChannelModel() = default;
  virtual Sequence transmit(std::span<const Symbol> x, RngStream& rng) const = 0;
  virtual int x_size() const = 0;
  virtual int y_size() const = 0;
  virtual std::string name() const = 0;
};

/// Memoryless channel applying a row-stochastic matrix per letter.
class DmcChannel final : public ChannelModel {
 public:
  explicit DmcChannel(std::vector<std::vector<double>> w,
                      std::string name = "dmc");
  static DmcChannel identity(int size);
  static DmcChannel bsc(double flip);

  Sequence transmit(std::span<const Symbol> x, RngStream& rng) const override;
  int x_size() const override { return static_cast<int>(w_.size()); }
  int y_size() const override {
    return w_.empty() ? 0 : static_cast<int>(w_[0].size());
  }
  std::string name() const override { return name_; }

 private:
  std::vector<std::vector<double>> w_;
  std::string name_;
};

/// Outputs a uniform sample from the normalized-distortion ball
/// {y : d(x, y)/n <= d_inner} around the input. Exact sampling via a
/// suffix-count dynamic program over positions; omega is 0 by construction
/// whenever the experiment's D is at least d_inner.
class BallChannel final : public ChannelModel {
 public:
  BallChannel(AdditiveDistortion d, Rational d_inner);

  Sequence transmit(std::span<const Symbol> x, RngStream& rng) const override;
  int x_size() const override { return d_.x_size(); }
  int y_size() const override { return d_.y_size(); }
  std::string name() const override { return "ball"; }
  const Rational& d_inner() const { return d_inner_; }

 private:
  AdditiveDistortion d_;
  Rational d_inner_;
};

/// b = decode o inner o encode: repeats each input letter `repeat` times,
/// sends the long block through the inner channel, and majority-votes each
/// group back to one output letter. repeat == 1 is the identity wrapper.
class RepetitionChannel final : public ChannelModel {
 public:
  RepetitionChannel(std::shared_ptr<const ChannelModel> inner, int repeat);

  Sequence transmit(std::span<const Symbol> x, RngStream& rng) const override;
  int x_size() const override { return inner_->x_size(); }
  int y_size() const override { return inner_->y_size(); }
  std::string name() const override;

 private:
  std::shared_ptr<const ChannelModel> inner_;
  int repeat_;
};

/// Monte Carlo estimate of omega_n = Pr(d(U, channel(U))/n > D).
struct DistortionProfile {
  std::int64_t n = 0;
  Rational D;
  McEstimate omega;

  double omega_upper() const { return omega.wilson().hi; }
};

DistortionProfile estimate_omega(const ChannelModel& ch, const TypeVector& p,
                                 const Rational& D, const Distortion& d,
                                 std::uint64_t trials, std::uint64_t seed,
                                 int threads = 1);

struct PackingConfig {
  TypeVector p;
  Rational D;
  double rate = 0.0;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  ArithPolicy policy;
  /// Codebooks up to this size are materialized and scanned; larger ones
  /// switch to sampling the impostor-typicality count from its exact
  /// binomial law (the codebook is i.i.d. and exchangeable, so the decoder
  /// outcome distribution is identical).
  std::uint64_t direct_codebook_limit = 4096;
};

struct PackingResult {
  std::int64_t n = 0;
  double rate = 0.0;
  BigInt codebook;
  std::uint64_t trials = 0;
  std::uint64_t correct = 0;
  std::uint64_t wrong_unique = 0;
  std::uint64_t none_typical = 0;
  std::uint64_t ambiguous = 0;
  bool collapsed = false;  // impostor counts sampled rather than materialized

  double correct_rate() const {
    return trials == 0 ? 0.0
                       : static_cast<double>(correct) / static_cast<double>(trials);
  }
  McEstimate correct_estimate() const { return McEstimate{correct, trials}; }
};

/// Per trial: a fresh codebook of independent uniform T_p codewords, the
/// first codeword transmitted, and unique-joint-typicality decoding of the
/// received block. "None typical" and "ambiguous" both count as errors.
PackingResult simulate_packing(const ChannelModel& ch, const PackingConfig& cfg,
                               const Distortion& d);

struct BoundCheck {
  double bound = 0.0;   // -omega_upper + A^(codebook - 1)
  double slack = 0.0;   // 3 Wilson half-widths of the empirical rate
  double margin = 0.0;  // empirical - (bound - slack)
  bool pass = false;
};

/// Verifies the correct-decoding chain bound. Uses the upper edge of the
/// omega interval and allows 3 Wilson half-widths of Monte Carlo slack.
BoundCheck bound_check(const PackingResult& result, const Prob& A,
                       const DistortionProfile& omega,
                       const ArithPolicy& policy = {});

/// Largest rate on a 0.01-bit grid whose analytic correctness bound
/// A^(2^floor(nR) - 1) stays at or above 0.99; 0 when A is exactly zero.
double achievable_rate_estimate(const TypeVector& p, const Rational& D,
                                const Distortion& d,
                                const ArithPolicy& policy = {}, int threads = 1,
                                double grid_step = 0.01,
                                double bound_threshold = 0.99);

}  // namespace covpack
