#include "covpack/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "covpack/oracle.hpp"
#include "covpack/parallel.hpp"
#include "covpack/version.hpp"

namespace covpack {

namespace fs = std::filesystem;
using nlohmann::json;

ArithPolicy ExperimentConfig::policy() const {
  ArithPolicy p;
  p.mode = arith;
  p.joint_type_budget = joint_type_budget;
  p.class_budget = class_budget;
  return p;
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in " + context);
  }
}

std::vector<Rational> parse_rational_array(const json& arr,
                                           const std::string& context) {
  if (!arr.is_array()) throw ConfigError(context + " must be an array");
  std::vector<Rational> out;
  for (const auto& v : arr) {
    if (!v.is_string())
      throw ConfigError(context + " entries must be \"num/den\" strings");
    out.push_back(parse_rational(v.get<std::string>()));
  }
  return out;
}

Alphabet parse_alphabet(const json& arr, const std::string& context) {
  if (!arr.is_array() || arr.empty())
    throw ConfigError(context + " must be a nonempty array of labels");
  std::vector<std::string> labels;
  for (const auto& v : arr) labels.push_back(v.get<std::string>());
  return Alphabet::from_labels(std::move(labels));
}

std::shared_ptr<AdditiveDistortion> parse_distortion(const json& obj, int xs,
                                                     int ys) {
  check_keys(obj, {"kind", "entries"}, "distortion");
  const std::string kind = obj.at("kind").get<std::string>();
  if (kind == "hamming")
    return std::make_shared<AdditiveDistortion>(AdditiveDistortion::hamming(xs, ys));
  if (kind != "matrix")
    throw ConfigError("distortion kind must be 'hamming' or 'matrix'");
  const json& entries = obj.at("entries");
  std::vector<std::vector<Rational>> m;
  for (const auto& row : entries)
    m.push_back(parse_rational_array(row, "distortion row"));
  auto d = std::make_shared<AdditiveDistortion>(std::move(m), "matrix");
  if (d->x_size() != xs || d->y_size() != ys)
    throw ConfigError("distortion matrix shape does not match the alphabets");
  return d;
}

ChannelSpec parse_channel(const json& obj) {
  check_keys(obj, {"kind", "flip", "matrix", "d_inner"}, "channel");
  ChannelSpec spec;
  spec.kind = obj.at("kind").get<std::string>();
  if (spec.kind == "bsc") {
    spec.flip = obj.at("flip").get<double>();
  } else if (spec.kind == "dmc") {
    for (const auto& row : obj.at("matrix"))
      spec.matrix.push_back(row.get<std::vector<double>>());
  } else if (spec.kind == "ball") {
    spec.d_inner = parse_rational(obj.at("d_inner").get<std::string>());
  } else if (spec.kind != "identity") {
    throw ConfigError("channel kind must be identity, bsc, dmc, or ball");
  }
  return spec;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

/// CSV writer with a schema comment line, LF endings, fixed column order.
class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& schema,
          const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    out_ << "# schema " << schema << "\n";
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

class Stopwatch {
 public:
  void start() { begin_ = std::chrono::steady_clock::now(); }
  double stop() {
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - begin_).count();
  }

 private:
  std::chrono::steady_clock::time_point begin_;
};

void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    const std::map<std::string, double>& timings_ms,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "covpack";
  m["version"] = kVersion;
  m["command"] = command;
  m["config_hash"] = cfg.config_hash;
  m["seed"] = cfg.seed;
  m["threads"] = cfg.threads;
  m["arith"] = arith_mode_name(cfg.arith);
  m["timings_ms"] = timings_ms;
  m["outputs"] = outputs;
  std::ofstream out(fs::path(cfg.out_dir) / (command + "_manifest.json"),
                    std::ios::binary);
  out << m.dump(2) << "\n";
}

TypeVector balanced_type(int alphabet_size, std::int64_t n) {
  std::vector<std::int64_t> counts(alphabet_size, n / alphabet_size);
  for (std::int64_t i = 0; i < n % alphabet_size; ++i) ++counts[i];
  return TypeVector::from_counts(std::move(counts));
}

TypeVector point_type(int alphabet_size, std::int64_t n) {
  std::vector<std::int64_t> counts(alphabet_size, 0);
  counts[0] = n;
  return TypeVector::from_counts(std::move(counts));
}

TypeVector random_type(int alphabet_size, std::int64_t n, RngStream& rng) {
  Sequence seq(n);
  for (auto& s : seq)
    s = static_cast<Symbol>(rng.below(static_cast<std::uint64_t>(alphabet_size)));
  return type_of(seq, alphabet_size);
}

TypeVector q_for_mode(const std::string& mode, int alphabet_size, std::int64_t n,
                      RngStream& rng) {
  if (mode == "balanced") return balanced_type(alphabet_size, n);
  if (mode == "point") return point_type(alphabet_size, n);
  if (mode == "random") return random_type(alphabet_size, n, rng);
  throw ConfigError("unknown q mode '" + mode + "'");
}

std::string sanitize_for_filename(const Rational& r) {
  std::string s = format_rational(r);
  for (char& c : s)
    if (c == '/') c = '_';
  return s;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(doc,
               {"source_alphabet", "repro_alphabet", "pmf", "distortion",
                "d_grid", "n_list", "r_grid", "channel", "trials", "seed",
                "out", "arith", "threads", "budget", "duality", "cover",
                "pack", "separation"},
               "config");

    ExperimentConfig cfg;
    cfg.source_alphabet = parse_alphabet(doc.at("source_alphabet"), "source_alphabet");
    cfg.repro_alphabet = parse_alphabet(doc.at("repro_alphabet"), "repro_alphabet");
    cfg.pmf = RationalPmf::from_probs(parse_rational_array(doc.at("pmf"), "pmf"));
    if (cfg.pmf.alphabet_size() != cfg.source_alphabet.size())
      throw ConfigError("pmf length does not match the source alphabet");
    cfg.distortion = parse_distortion(doc.at("distortion"),
                                      cfg.source_alphabet.size(),
                                      cfg.repro_alphabet.size());
    cfg.d_grid = parse_rational_array(doc.at("d_grid"), "d_grid");
    for (const auto& D : cfg.d_grid)
      if (sgn(D) < 0) throw ConfigError("d_grid entries must be nonnegative");
    cfg.n_list = doc.at("n_list").get<std::vector<std::int64_t>>();
    for (std::int64_t n : cfg.n_list)
      if (n < 1) throw ConfigError("n_list entries must be positive");
    if (doc.contains("r_grid")) {
      cfg.r_grid = doc.at("r_grid").get<std::vector<double>>();
      for (double r : cfg.r_grid)
        if (r < 0.0) throw ConfigError("r_grid entries must be nonnegative");
    }
    if (doc.contains("channel")) cfg.channel = parse_channel(doc.at("channel"));
    if (doc.contains("trials")) cfg.trials = doc.at("trials").get<std::uint64_t>();
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("out")) cfg.out_dir = doc.at("out").get<std::string>();
    if (doc.contains("arith"))
      cfg.arith = parse_arith_mode(doc.at("arith").get<std::string>());
    if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    if (doc.contains("budget")) {
      const json& s = doc.at("budget");
      check_keys(s, {"joint_types", "class_size"}, "budget");
      if (s.contains("joint_types"))
        cfg.joint_type_budget = s.at("joint_types").get<std::uint64_t>();
      if (s.contains("class_size"))
        cfg.class_budget = s.at("class_size").get<std::uint64_t>();
    }

    if (doc.contains("duality")) {
      const json& s = doc.at("duality");
      check_keys(s, {"probes", "q_modes"}, "duality");
      if (s.contains("probes")) cfg.duality.probes = s.at("probes").get<int>();
      if (s.contains("q_modes"))
        cfg.duality.q_modes = s.at("q_modes").get<std::vector<std::string>>();
      if (cfg.duality.probes < 1) throw ConfigError("duality.probes must be >= 1");
    }
    if (doc.contains("cover")) {
      const json& s = doc.at("cover");
      check_keys(s, {"q"}, "cover");
      if (s.contains("q")) {
        if (s.at("q").is_string()) {
          if (s.at("q").get<std::string>() != "sweep")
            throw ConfigError("cover.q must be \"sweep\" or a count array");
          cfg.cover.sweep_q = true;
        } else {
          cfg.cover.sweep_q = false;
          cfg.cover.q_counts = s.at("q").get<std::vector<std::int64_t>>();
        }
      }
    }
    if (doc.contains("pack")) {
      const json& s = doc.at("pack");
      check_keys(s, {"omega_trials", "direct_codebook_limit"}, "pack");
      if (s.contains("omega_trials"))
        cfg.pack.omega_trials = s.at("omega_trials").get<std::uint64_t>();
      if (s.contains("direct_codebook_limit"))
        cfg.pack.direct_codebook_limit =
            s.at("direct_codebook_limit").get<std::uint64_t>();
    }
    if (doc.contains("separation")) {
      const json& s = doc.at("separation");
      check_keys(s,
                 {"wrapper", "repeat", "D", "rate", "overshoot_rate",
                  "omega_threshold", "omega_trials"},
                 "separation");
      if (s.contains("wrapper"))
        cfg.separation.wrapper = s.at("wrapper").get<std::string>();
      if (cfg.separation.wrapper != "identity" &&
          cfg.separation.wrapper != "repetition")
        throw ConfigError("separation.wrapper must be identity or repetition");
      if (s.contains("repeat")) cfg.separation.repeat = s.at("repeat").get<int>();
      if (s.contains("D"))
        cfg.separation.D = parse_rational(s.at("D").get<std::string>());
      if (s.contains("rate")) cfg.separation.rate = s.at("rate").get<double>();
      if (s.contains("overshoot_rate"))
        cfg.separation.overshoot_rate = s.at("overshoot_rate").get<double>();
      if (s.contains("omega_threshold"))
        cfg.separation.omega_threshold = s.at("omega_threshold").get<double>();
      if (s.contains("omega_trials"))
        cfg.separation.omega_trials = s.at("omega_trials").get<std::uint64_t>();
    }

    cfg.config_hash = hex64(fnv1a64(doc.dump()));
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& overrides) {
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.arith) cfg.arith = *overrides.arith;
}

std::shared_ptr<ChannelModel> make_channel(const ChannelSpec& spec,
                                           const AdditiveDistortion& d) {
  if (spec.kind == "identity")
    return std::make_shared<DmcChannel>(DmcChannel::identity(d.y_size()));
  if (spec.kind == "bsc") {
    if (d.x_size() != 2 || d.y_size() != 2)
      throw ConfigError("bsc channel needs binary alphabets");
    return std::make_shared<DmcChannel>(DmcChannel::bsc(spec.flip));
  }
  if (spec.kind == "dmc") return std::make_shared<DmcChannel>(spec.matrix);
  if (spec.kind == "ball")
    return std::make_shared<BallChannel>(d, spec.d_inner);
  throw ConfigError("unknown channel kind '" + spec.kind + "'");
}

int cmd_duality(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Stopwatch watch;
  watch.start();

  struct Cell {
    std::int64_t n;
    Rational D;
    std::string q_mode;
  };
  std::vector<Cell> cells;
  for (std::int64_t n : cfg.n_list)
    for (const Rational& D : cfg.d_grid)
      for (const std::string& mode : cfg.duality.q_modes)
        cells.push_back({n, D, mode});

  struct RowData {
    std::vector<std::string> cells;
    bool equal = true;
    bool skipped = false;
  };
  std::vector<RowData> rows(cells.size());
  ArithPolicy policy = cfg.policy();
  policy.mode = ArithMode::exact;

  parallel_for_indexed(cells.size(), cfg.threads, [&](std::uint64_t i) {
    const Cell& cell = cells[i];
    const TypeVector p = cfg.pmf.type_at(cell.n);
    RngStream rng = RngStream::derive(cfg.seed, "duality.cell", {i});
    const TypeVector q =
        q_for_mode(cell.q_mode, cfg.repro_alphabet.size(), cell.n, rng);
    RowData& row = rows[i];
    try {
      const DualityReport rep = check_duality(p, q, cell.D, *cfg.distortion,
                                              cfg.duality.probes, rng, policy);
      row.equal = rep.equal;
      row.cells = {std::to_string(cfg.source_alphabet.size()),
                   std::to_string(cfg.repro_alphabet.size()),
                   std::to_string(cell.n),
                   format_rational(cell.D),
                   cfg.distortion->name(),
                   cell.q_mode,
                   p.str(),
                   q.str(),
                   std::to_string(rep.probes),
                   format_rational(rep.lhs),
                   format_rational(rep.rhs),
                   format_rational(rep.both_random),
                   rep.equal ? "true" : "false",
                   "ok"};
    } catch (const BudgetError&) {
      row.skipped = true;
      row.cells = {std::to_string(cfg.source_alphabet.size()),
                   std::to_string(cfg.repro_alphabet.size()),
                   std::to_string(cell.n),
                   format_rational(cell.D),
                   cfg.distortion->name(),
                   cell.q_mode,
                   p.str(),
                   q.str(),
                   std::to_string(cfg.duality.probes),
                   "",
                   "",
                   "",
                   "",
                   "skipped"};
    }
  });

  CsvFile csv(fs::path(cfg.out_dir) / "duality.csv", "covpack.duality.v1",
              {"x_size", "y_size", "n", "D", "distortion", "q_mode", "p_counts",
               "q_counts", "probes", "lhs", "rhs", "both_random", "equal",
               "status"});
  bool all_equal = true;
  for (const RowData& row : rows) {
    csv.row(row.cells);
    if (!row.skipped && !row.equal) all_equal = false;
  }
  write_manifest(cfg, "duality", {{"total", watch.stop()}}, {"duality.csv"});
  return all_equal ? kExitOk : kExitViolation;
}

int cmd_exponent(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Stopwatch watch;
  watch.start();

  struct Cell {
    Rational D;
    std::int64_t n;
  };
  std::vector<Cell> cells;
  for (const Rational& D : cfg.d_grid)
    for (std::int64_t n : cfg.n_list) cells.push_back({D, n});

  struct RowData {
    std::vector<std::string> cells;
    double exponent = 0.0;
  };
  std::vector<RowData> rows(cells.size());
  const ArithPolicy policy = cfg.policy();

  parallel_for_indexed(cells.size(), cfg.threads, [&](std::uint64_t i) {
    const Cell& cell = cells[i];
    const TypeVector p = cfg.pmf.type_at(cell.n);
    const BestQ bq = best_q(p, cell.D, *cfg.distortion, policy, 1);
    const double exponent =
        bq.covered.is_zero() ? std::numeric_limits<double>::infinity()
                             : -bq.covered.log2() / static_cast<double>(cell.n);

    std::vector<std::vector<double>> dmat(
        cfg.distortion->x_size(),
        std::vector<double>(cfg.distortion->y_size()));
    for (int x = 0; x < cfg.distortion->x_size(); ++x)
      for (int y = 0; y < cfg.distortion->y_size(); ++y)
        dmat[x][y] = cfg.distortion->entry(x, y).get_d();
    const RdCurvePoint ref =
        blahut_arimoto(cfg.pmf.probs_double(), dmat, cell.D.get_d(), 1e-9);

    rows[i].exponent = exponent;
    rows[i].cells = {std::to_string(cell.n),
                     format_rational(cell.D),
                     bq.excess.is_exact() ? "exact" : "log",
                     bq.q.str(),
                     bq.excess.str(),
                     format_double(bq.covered.log2()),
                     format_double(-bq.covered.log2()),
                     format_double(exponent),
                     format_double(ref.rate)};
  });

  CsvFile csv(fs::path(cfg.out_dir) / "exponent.csv", "covpack.exponent.v1",
              {"n", "D", "arith", "best_q", "A", "log2_covered", "beta_log2",
               "exponent", "rd_reference"});
  std::vector<std::string> outputs = {"exponent.csv"};
  std::size_t idx = 0;
  for (const Rational& D : cfg.d_grid) {
    CsvFile plot(fs::path(cfg.out_dir) /
                     ("exponent_plot_" + sanitize_for_filename(D) + ".csv"),
                 "covpack.exponent-plot.v1", {"n", "exponent"});
    outputs.push_back("exponent_plot_" + sanitize_for_filename(D) + ".csv");
    for (std::int64_t n : cfg.n_list) {
      csv.row(rows[idx].cells);
      plot.row({std::to_string(n), format_double(rows[idx].exponent)});
      ++idx;
    }
  }
  write_manifest(cfg, "exponent", {{"total", watch.stop()}}, outputs);
  return kExitOk;
}

int cmd_cover(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Stopwatch watch;
  watch.start();

  struct Cell {
    std::int64_t n;
    Rational D;
    double rate;
  };
  std::vector<Cell> cells;
  for (std::int64_t n : cfg.n_list)
    for (const Rational& D : cfg.d_grid)
      for (double r : cfg.r_grid) cells.push_back({n, D, r});
  if (cfg.r_grid.empty())
    throw ConfigError("cover needs a nonempty r_grid");

  std::vector<std::vector<std::string>> rows(cells.size());
  const ArithPolicy policy = cfg.policy();

  parallel_for_indexed(cells.size(), cfg.threads, [&](std::uint64_t i) {
    const Cell& cell = cells[i];
    CoveringConfig cc;
    cc.p = cfg.pmf.type_at(cell.n);
    if (!cfg.cover.sweep_q)
      cc.q = TypeVector::from_counts(cfg.cover.q_counts);
    cc.D = cell.D;
    cc.rate = cell.rate;
    cc.trials = cfg.trials;
    cc.seed = splitmix64(cfg.seed ^ i);
    cc.threads = 1;
    cc.policy = policy;
    const CoveringResult res = simulate_covering(cc, *cfg.distortion);
    const WilsonInterval w = res.failures.wilson();
    const double analytic = res.analytic.to_double();
    rows[i] = {std::to_string(cell.n),
               format_rational(cell.D),
               format_double(cell.rate),
               cfg.cover.sweep_q ? "sweep" : "fixed",
               res.q.str(),
               res.codebook.get_str(),
               std::to_string(res.failures.trials),
               std::to_string(res.failures.hits),
               format_double(res.failures.rate()),
               format_double(w.lo),
               format_double(w.hi),
               res.analytic.str(),
               w.contains(analytic) ? "true" : "false"};
  });

  CsvFile csv(fs::path(cfg.out_dir) / "cover.csv", "covpack.cover.v1",
              {"n", "D", "R", "q_mode", "q_counts", "codebook_size", "trials",
               "failures", "failure_rate", "wilson_lo", "wilson_hi",
               "analytic_failure", "analytic_in_wilson"});
  for (const auto& row : rows) csv.row(row);
  write_manifest(cfg, "cover", {{"total", watch.stop()}}, {"cover.csv"});
  return kExitOk;
}

int cmd_pack(const ExperimentConfig& cfg) {
  if (!cfg.channel) throw ConfigError("pack needs a channel");
  if (cfg.r_grid.empty()) throw ConfigError("pack needs a nonempty r_grid");
  fs::create_directories(cfg.out_dir);
  Stopwatch watch;
  watch.start();

  const std::shared_ptr<ChannelModel> channel =
      make_channel(*cfg.channel, *cfg.distortion);

  struct Group {
    std::int64_t n;
    Rational D;
  };
  std::vector<Group> groups;
  for (std::int64_t n : cfg.n_list)
    for (const Rational& D : cfg.d_grid) groups.push_back({n, D});

  struct GroupData {
    DistortionProfile omega;
    Prob A;
    std::vector<std::vector<std::string>> rows;
    bool all_pass = true;
  };
  std::vector<GroupData> data(groups.size());
  const ArithPolicy policy = cfg.policy();

  parallel_for_indexed(groups.size(), cfg.threads, [&](std::uint64_t g) {
    const Group& group = groups[g];
    const TypeVector p = cfg.pmf.type_at(group.n);
    GroupData& gd = data[g];
    gd.omega = estimate_omega(*channel, p, group.D, *cfg.distortion,
                              cfg.pack.omega_trials,
                              splitmix64(cfg.seed ^ (g * 2 + 1)), 1);
    gd.A = best_q(p, group.D, *cfg.distortion, policy, 1).excess;
    for (std::size_t ri = 0; ri < cfg.r_grid.size(); ++ri) {
      PackingConfig pc;
      pc.p = p;
      pc.D = group.D;
      pc.rate = cfg.r_grid[ri];
      pc.trials = cfg.trials;
      pc.seed = splitmix64(cfg.seed ^ (g * 1000 + ri));
      pc.threads = 1;
      pc.policy = policy;
      pc.direct_codebook_limit = cfg.pack.direct_codebook_limit;
      const PackingResult res = simulate_packing(*channel, pc, *cfg.distortion);
      const BoundCheck check = bound_check(res, gd.A, gd.omega, policy);
      gd.all_pass = gd.all_pass && check.pass;
      const WilsonInterval w = res.correct_estimate().wilson();
      gd.rows.push_back({std::to_string(group.n),
                         format_rational(group.D),
                         format_double(pc.rate),
                         channel->name(),
                         res.codebook.get_str(),
                         std::to_string(res.trials),
                         std::to_string(res.correct),
                         std::to_string(res.wrong_unique),
                         std::to_string(res.none_typical),
                         std::to_string(res.ambiguous),
                         format_double(res.correct_rate()),
                         format_double(w.lo),
                         format_double(w.hi),
                         format_double(gd.omega.omega.rate()),
                         format_double(gd.omega.omega_upper()),
                         gd.A.str(),
                         format_double(check.bound),
                         format_double(check.slack),
                         check.pass ? "true" : "false",
                         format_double(check.margin)});
    }
  });

  CsvFile csv(fs::path(cfg.out_dir) / "pack.csv", "covpack.pack.v1",
              {"n", "D", "R", "channel", "codebook_size", "trials", "correct",
               "wrong_unique", "none_typical", "ambiguous", "correct_rate",
               "wilson_lo", "wilson_hi", "omega_hat", "omega_upper", "A",
               "bound", "slack", "pass", "margin"});
  bool all_pass = true;
  for (const GroupData& gd : data) {
    all_pass = all_pass && gd.all_pass;
    for (const auto& row : gd.rows) csv.row(row);
  }
  write_manifest(cfg, "pack", {{"total", watch.stop()}}, {"pack.csv"});
  return all_pass ? kExitOk : kExitViolation;
}

int cmd_separation(const ExperimentConfig& cfg) {
  if (!cfg.channel) throw ConfigError("separation needs an inner channel");
  fs::create_directories(cfg.out_dir);
  Stopwatch watch;
  watch.start();

  const Rational D = cfg.separation.D.value_or(
      cfg.d_grid.empty() ? Rational(0) : cfg.d_grid.front());
  const std::shared_ptr<ChannelModel> inner =
      make_channel(*cfg.channel, *cfg.distortion);
  const int repeat =
      cfg.separation.wrapper == "repetition" ? cfg.separation.repeat : 1;
  const auto composed = std::make_shared<RepetitionChannel>(inner, repeat);
  const ArithPolicy policy = cfg.policy();

  CsvFile csv(fs::path(cfg.out_dir) / "separation.csv",
              "covpack.separation.v1",
              {"n", "inner_channel", "wrapper", "D", "omega_hat", "omega_upper",
               "omega_threshold", "phase", "R", "codebook_size", "trials",
               "correct_rate", "exponent"});

  bool aborted = false;
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const std::int64_t n = cfg.n_list[ni];
    const TypeVector p = cfg.pmf.type_at(n);
    const DistortionProfile omega = estimate_omega(
        *composed, p, D, *cfg.distortion, cfg.separation.omega_trials,
        splitmix64(cfg.seed ^ (ni * 7 + 3)), cfg.threads);
    if (omega.omega_upper() > cfg.separation.omega_threshold) {
      // The wrapper failed to deliver the source within D; report and stop
      // rather than claim anything about achievable rates.
      csv.row({std::to_string(n), inner->name(), cfg.separation.wrapper,
               format_rational(D), format_double(omega.omega.rate()),
               format_double(omega.omega_upper()),
               format_double(cfg.separation.omega_threshold), "aborted", "",
               "", "", "", ""});
      aborted = true;
      continue;
    }
    const double exponent = rate_exponent(p, D, *cfg.distortion, policy,
                                          cfg.threads);
    struct Phase {
      const char* name;
      double rate;
    };
    std::vector<Phase> phases = {{"at_rate", cfg.separation.rate}};
    phases.push_back(
        {"overshoot", cfg.separation.overshoot_rate.value_or(exponent + 0.3)});
    for (std::size_t pi = 0; pi < phases.size(); ++pi) {
      PackingConfig pc;
      pc.p = p;
      pc.D = D;
      pc.rate = phases[pi].rate;
      pc.trials = cfg.trials;
      pc.seed = splitmix64(cfg.seed ^ (ni * 100 + pi + 11));
      pc.threads = cfg.threads;
      pc.policy = policy;
      pc.direct_codebook_limit = cfg.pack.direct_codebook_limit;
      const PackingResult res = simulate_packing(*composed, pc, *cfg.distortion);
      csv.row({std::to_string(n), inner->name(), cfg.separation.wrapper,
               format_rational(D), format_double(omega.omega.rate()),
               format_double(omega.omega_upper()),
               format_double(cfg.separation.omega_threshold), phases[pi].name,
               format_double(phases[pi].rate), res.codebook.get_str(),
               std::to_string(res.trials), format_double(res.correct_rate()),
               format_double(exponent)});
    }
  }
  write_manifest(cfg, "separation", {{"total", watch.stop()}},
                 {"separation.csv"});
  return aborted ? kExitViolation : kExitOk;
}

}  // namespace covpack
