#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "covpack/experiments.hpp"

using namespace covpack;
namespace fs = std::filesystem;

namespace {

std::string small_config(const std::string& out_dir, int threads,
                         const std::string& extra = "") {
  std::ostringstream cfg;
  cfg << R"({
  "source_alphabet": ["0", "1"],
  "repro_alphabet": ["0", "1"],
  "pmf": ["1/2", "1/2"],
  "distortion": {"kind": "hamming"},
  "d_grid": ["0", "1/4"],
  "n_list": [2, 4],
  "r_grid": [0.0, 0.25],
  "channel": {"kind": "bsc", "flip": 0.05},
  "trials": 400,
  "seed": 42,
  "threads": )"
      << threads << R"(,
  "out": ")" << out_dir << "\"" << extra << "\n}\n";
  return cfg.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("covpack_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("configs parse with exact rationals") {
  const auto cfg = parse_config_text(small_config("/tmp/x", 1));
  CHECK(cfg.pmf.n0() == 2);
  CHECK(cfg.d_grid[1] == parse_rational("1/4"));
  CHECK(cfg.trials == 400);
  CHECK(cfg.seed == 42);
  CHECK(cfg.distortion->name() == "hamming");
  CHECK(cfg.channel->kind == "bsc");
  CHECK(!cfg.config_hash.empty());
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config_text(small_config("/tmp/x", 1,
                                                 ",\n  \"surprise\": 1")),
                  ConfigError);
  std::string nested = small_config("/tmp/x", 1);
  nested.replace(nested.find("\"kind\": \"hamming\""), 17,
                 "\"kind\": \"hamming\", \"oops\": 2");
  CHECK_THROWS_AS(parse_config_text(nested), ConfigError);
}

TEST_CASE("malformed values become config errors") {
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  std::string bad_pmf = small_config("/tmp/x", 1);
  bad_pmf.replace(bad_pmf.find("\"1/2\", \"1/2\""), 12, "\"1/2\", \"1/3\"");
  CHECK_THROWS_AS(parse_config_text(bad_pmf), ConfigError);
  std::string bad_rat = small_config("/tmp/x", 1);
  bad_rat.replace(bad_rat.find("\"1/2\", \"1/2\""), 12, "\"0.5\", \"1/2\"");
  CHECK_THROWS_AS(parse_config_text(bad_rat), ConfigError);
}

TEST_CASE("cli overrides replace config fields") {
  auto cfg = parse_config_text(small_config("/tmp/x", 1));
  CliOverrides o;
  o.seed = 7;
  o.threads = 3;
  o.out_dir = "/tmp/y";
  o.arith = ArithMode::log;
  apply_overrides(cfg, o);
  CHECK(cfg.seed == 7);
  CHECK(cfg.threads == 3);
  CHECK(cfg.out_dir == "/tmp/y");
  CHECK(cfg.arith == ArithMode::log);
}

TEST_CASE("duality command writes equal rows and exits zero") {
  const fs::path out = temp_dir("duality");
  auto cfg = parse_config_text(small_config(out.string(), 1));
  CHECK(cmd_duality(cfg) == kExitOk);
  const std::string csv = read_file(out / "duality.csv");
  CHECK(csv.find("# schema covpack.duality.v1") == 0);
  CHECK(csv.find("false") == std::string::npos);
  CHECK(csv.find(",ok") != std::string::npos);
  const std::string manifest = read_file(out / "duality_manifest.json");
  CHECK(manifest.find(cfg.config_hash) != std::string::npos);
  CHECK(manifest.find("duality.csv") != std::string::npos);
}

TEST_CASE("duality rows beyond the budget are skipped, not truncated") {
  const fs::path out = temp_dir("duality_budget");
  auto cfg = parse_config_text(small_config(
      out.string(), 1, ",\n  \"budget\": {\"class_size\": 2, \"joint_types\": 1}"));
  CHECK(cmd_duality(cfg) == kExitOk);
  const std::string csv = read_file(out / "duality.csv");
  CHECK(csv.find("skipped") != std::string::npos);
}

TEST_CASE("grid commands are byte-identical across thread counts") {
  const fs::path out1 = temp_dir("det1");
  const fs::path out4 = temp_dir("det4");
  {
    auto c1 = parse_config_text(small_config(out1.string(), 1));
    auto c4 = parse_config_text(small_config(out1.string(), 1));
    c4.out_dir = out4.string();
    c4.threads = 4;
    CHECK(cmd_duality(c1) == kExitOk);
    CHECK(cmd_duality(c4) == kExitOk);
    CHECK(read_file(out1 / "duality.csv") == read_file(out4 / "duality.csv"));

    CHECK(cmd_cover(c1) == kExitOk);
    CHECK(cmd_cover(c4) == kExitOk);
    CHECK(read_file(out1 / "cover.csv") == read_file(out4 / "cover.csv"));

    CHECK(cmd_pack(c1) == kExitOk);
    CHECK(cmd_pack(c4) == kExitOk);
    CHECK(read_file(out1 / "pack.csv") == read_file(out4 / "pack.csv"));

    CHECK(cmd_exponent(c1) == kExitOk);
    CHECK(cmd_exponent(c4) == kExitOk);
    CHECK(read_file(out1 / "exponent.csv") == read_file(out4 / "exponent.csv"));
  }
}

TEST_CASE("identical config and seed reproduce byte-identical reports") {
  const fs::path out1 = temp_dir("rerun1");
  const fs::path out2 = temp_dir("rerun2");
  auto c1 = parse_config_text(small_config(out1.string(), 2));
  auto c2 = parse_config_text(small_config(out1.string(), 2));
  c2.out_dir = out2.string();
  CHECK(cmd_pack(c1) == kExitOk);
  CHECK(cmd_pack(c2) == kExitOk);
  CHECK(read_file(out1 / "pack.csv") == read_file(out2 / "pack.csv"));
}

TEST_CASE("exponent command emits plot files per distortion level") {
  const fs::path out = temp_dir("exponent");
  auto cfg = parse_config_text(small_config(out.string(), 1));
  CHECK(cmd_exponent(cfg) == kExitOk);
  CHECK(fs::exists(out / "exponent.csv"));
  CHECK(fs::exists(out / "exponent_plot_0.csv"));
  CHECK(fs::exists(out / "exponent_plot_1_4.csv"));
  const std::string plot = read_file(out / "exponent_plot_0.csv");
  CHECK(plot.find("n,exponent") != std::string::npos);
}

TEST_CASE("pack command verifies the bound on every row") {
  const fs::path out = temp_dir("pack");
  auto cfg = parse_config_text(small_config(out.string(), 1));
  CHECK(cmd_pack(cfg) == kExitOk);
  const std::string csv = read_file(out / "pack.csv");
  // Every data row carries pass=true.
  std::size_t rows = 0, passes = 0, pos = 0;
  while ((pos = csv.find("\nbsc", pos)) != std::string::npos) ++pos, ++rows;
  pos = 0;
  while ((pos = csv.find("true", pos)) != std::string::npos) ++pos, ++passes;
  CHECK(passes >= rows);
}

TEST_CASE("separation demo reports both phases") {
  const fs::path out = temp_dir("separation");
  std::string text = small_config(out.string(), 1,
                                  ",\n  \"separation\": {\"wrapper\": "
                                  "\"identity\", \"D\": \"1/4\", \"rate\": "
                                  "0.25, \"omega_trials\": 2000}");
  auto cfg = parse_config_text(text);
  cfg.n_list = {8};
  cfg.trials = 500;
  CHECK(cmd_separation(cfg) == kExitOk);
  const std::string csv = read_file(out / "separation.csv");
  CHECK(csv.find("at_rate") != std::string::npos);
  CHECK(csv.find("overshoot") != std::string::npos);
}

TEST_CASE("separation aborts when the wrapper cannot deliver distortion D") {
  const fs::path out = temp_dir("separation_abort");
  std::string text = small_config(out.string(), 1,
                                  ",\n  \"separation\": {\"wrapper\": "
                                  "\"identity\", \"D\": \"0\", \"rate\": 0.25,"
                                  " \"omega_trials\": 2000, "
                                  "\"omega_threshold\": 0.01}");
  auto cfg = parse_config_text(text);  // bsc(0.05) cannot meet D = 0
  cfg.n_list = {8};
  CHECK(cmd_separation(cfg) == kExitViolation);
  const std::string csv = read_file(out / "separation.csv");
  CHECK(csv.find("aborted") != std::string::npos);
}
