#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "covpack/distortion.hpp"
#include "covpack/packing.hpp"
#include "covpack/type_lab.hpp"

namespace covpack {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 2;  // duality inequality or bound failure
inline constexpr int kExitConfig = 3;
inline constexpr int kExitBudget = 4;

struct ChannelSpec {
  std::string kind;  // identity | bsc | dmc | ball
  double flip = 0.0;
  std::vector<std::vector<double>> matrix;
  Rational d_inner;
};

struct DualitySection {
  int probes = 2;
  std::vector<std::string> q_modes = {"balanced", "point", "random"};
};

struct CoverSection {
  bool sweep_q = true;
  std::vector<std::int64_t> q_counts;  // used when sweep_q is false
};

struct PackSection {
  std::uint64_t omega_trials = 20000;
  std::uint64_t direct_codebook_limit = 4096;
};

struct SeparationSection {
  std::string wrapper = "identity";  // identity | repetition
  int repeat = 3;
  std::optional<Rational> D;  // defaults to the first d_grid entry
  double rate = 0.25;
  std::optional<double> overshoot_rate;  // default: exponent + 0.3
  double omega_threshold = 0.05;
  std::uint64_t omega_trials = 20000;
};

/// Parsed experiment configuration. Rationals stay exact end to end;
/// unknown keys anywhere in the document are rejected.
struct ExperimentConfig {
  Alphabet source_alphabet;
  Alphabet repro_alphabet;
  RationalPmf pmf;
  std::shared_ptr<AdditiveDistortion> distortion;
  std::vector<Rational> d_grid;
  std::vector<std::int64_t> n_list;
  std::vector<double> r_grid;
  std::optional<ChannelSpec> channel;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  ArithMode arith = ArithMode::auto_select;
  int threads = 1;
  std::uint64_t joint_type_budget = 1'000'000;
  std::uint64_t class_budget = 1'000'000;
  DualitySection duality;
  CoverSection cover;
  PackSection pack;
  SeparationSection separation;
  std::string config_hash;

  ArithPolicy policy() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& json_text);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<ArithMode> arith;
};

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& overrides);

std::shared_ptr<ChannelModel> make_channel(const ChannelSpec& spec,
                                           const AdditiveDistortion& d);

/// Experiment runners behind the CLI subcommands. Each writes CSV reports
/// plus a JSON manifest into the config's output directory and returns a
/// process exit code.
int cmd_duality(const ExperimentConfig& cfg);
int cmd_exponent(const ExperimentConfig& cfg);
int cmd_cover(const ExperimentConfig& cfg);
int cmd_pack(const ExperimentConfig& cfg);
int cmd_separation(const ExperimentConfig& cfg);

}  // namespace covpack
