#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mandera/cli.hpp"
#include "mandera/config.hpp"
#include "mandera/experiment.hpp"
#include "mandera/matrix.hpp"
#include "mandera/report.hpp"
#include "mandera/rng.hpp"

using namespace mandera;

namespace {

std::filesystem::path tmp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mandera_cli_tests" / name;
  std::filesystem::create_directories(dir);
  return dir;
}

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned = {"mandera"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kBaseConfig = R"({
  "dataset": {"type": "synthetic_blobs", "classes": 4, "dim": 8, "per_node": 50, "holdout": 200},
  "model": {"type": "softmax"},
  "fl": {"nodes": 12, "epochs": 4, "learning_rate": 0.01, "momentum": 0.5, "batch_size": 10},
  "attack": {"kind": "zero_gradient", "malicious_count": 3},
  "defense": {"rule": "mandera_then_mean"},
  "replicates": 2,
  "seed": 7,
  "mode": "simulate"
})";

}  // namespace

TEST_CASE("config parses, validates and echoes") {
  auto cfg = ExperimentConfig::from_json_text(kBaseConfig);
  CHECK(cfg.fl.n == 12);
  CHECK(cfg.malicious_count == 3);
  CHECK(cfg.defense.kind == AggregationKind::ManderaThenMean);
  CHECK(cfg.replicates == 2);
  auto echo = cfg.to_json();
  auto back = ExperimentConfig::from_json_text(echo);
  CHECK(back.to_json() == echo);
}

TEST_CASE("config rejects unknown keys at every level") {
  std::string bad1 = R"({"unknown_top": 1})";
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(bad1),
                       doctest::Contains("unknown_top"), std::invalid_argument);
  std::string bad2 = R"({"attack": {"kind": "gaussian", "varaince": 30}})";
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(bad2),
                       doctest::Contains("varaince"), std::invalid_argument);
  std::string bad3 = R"({"fl": {"nodes": 10, "epoch": 3}})";
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(bad3), std::invalid_argument);
}

TEST_CASE("config validation guards") {
  std::string majority = R"({"fl": {"nodes": 10}, "attack": {"kind": "gaussian", "malicious_count": 5}})";
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(majority), std::invalid_argument);
  std::string both = R"({"attack": {"kind": "gaussian", "malicious_count": 2, "malicious_nodes": [1]}})";
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(both), std::invalid_argument);
  std::string bad_mode = R"({"mode": "???"})";
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(bad_mode), std::invalid_argument);
  std::string bad_json = "{nope";
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json_text(bad_json),
                       doctest::Contains("parse"), std::invalid_argument);
}

TEST_CASE("attack_for_replicate draws distinct deterministic subsets") {
  auto cfg = ExperimentConfig::from_json_text(kBaseConfig);
  auto a0 = cfg.attack_for_replicate(0);
  auto a1 = cfg.attack_for_replicate(1);
  CHECK(a0.malicious.size() == 3);
  CHECK(a1.malicious.size() == 3);
  CHECK(a0.malicious != a1.malicious);  // fresh subset per replicate
  CHECK(cfg.attack_for_replicate(0).malicious == a0.malicious);
  CHECK(a0.seed != a1.seed);
}

TEST_CASE("run_experiment simulate writes deterministic files") {
  auto cfg = ExperimentConfig::from_json_text(kBaseConfig);
  auto out1 = tmp_dir("sim1");
  auto out2 = tmp_dir("sim2");
  cfg.out_dir = out1.string();
  auto s1 = run_experiment(cfg, 2);
  cfg.out_dir = out2.string();
  auto s2 = run_experiment(cfg, 1);
  REQUIRE(s1.files_written.size() == s2.files_written.size());
  CHECK(read_file(out1 / "results.csv") == read_file(out2 / "results.csv"));
  CHECK(read_file(out1 / "replicate_0_runlog.jsonl") ==
        read_file(out2 / "replicate_0_runlog.jsonl"));
  CHECK(read_file(out1 / "boxplot.csv") == read_file(out2 / "boxplot.csv"));
  CHECK(read_file(out1 / "results.csv").rfind("replicate,final_accuracy", 0) == 0);
}

TEST_CASE("run_experiment detect-grid covers the requested cells") {
  auto cfg = ExperimentConfig::from_json_text(kBaseConfig);
  cfg.mode = "detect-grid";
  cfg.replicates = 1;
  auto out = tmp_dir("grid");
  cfg.out_dir = out.string();
  DetectGrid grid;
  grid.attacks = {"gaussian", "sign_flip"};
  grid.malicious_counts = {2, 3};
  run_detect_grid(cfg, grid, 2);
  auto rows = read_file(out / "detect_results.csv");
  CHECK(rows.find("gaussian,2,0,") != std::string::npos);
  CHECK(rows.find("sign_flip,3,0,") != std::string::npos);
  auto box = read_file(out / "detect_boxplot.csv");
  CHECK(box.find("gaussian,2,recall,") != std::string::npos);
  CHECK(std::filesystem::exists(out / "moments_sign_flip_3.csv"));
}

TEST_CASE("cli detect reports labels for a saved matrix") {
  auto dir = tmp_dir("detect");
  // 8 spread rows + 4 identical rows
  Rng rng(401);
  MessageMatrix m(12, 60);
  for (int i = 0; i < 8; ++i)
    for (std::int64_t j = 0; j < m.p; ++j) m.at(i, j) = rng.normal();
  for (int i = 8; i < 12; ++i)
    for (std::int64_t j = 0; j < m.p; ++j) m.at(i, j) = 40.0 + 0.001 * (j % 5);
  auto mp = dir / "m.mndm";
  save_matrix_binary(m, mp.string());
  auto outp = dir / "det.json";
  CHECK(run_cli({"detect", "--matrix", mp.string(), "--out", outp.string()}) == 0);
  auto js = read_file(outp);
  CHECK(js.find("\"rule\":\"duplicate_rows\"") != std::string::npos);
  CHECK(js.find("\"labels\":[0,0,0,0,0,0,0,0,1,1,1,1]") != std::string::npos);
}

TEST_CASE("cli exit codes distinguish validation from runtime failures") {
  CHECK(run_cli({"detect"}) == 2);                                // missing flag
  CHECK(run_cli({"nonsense"}) == 2);                              // bad subcommand
  CHECK(run_cli({"detect", "--matrix", "/nonexistent.mndm"}) == 1);

  auto dir = tmp_dir("badcfg");
  auto cfgp = dir / "bad.json";
  write_file_atomic(cfgp.string(), R"({"oops": true})");
  CHECK(run_cli({"simulate", "--config", cfgp.string()}) == 2);
}

TEST_CASE("cli simulate runs a config end to end") {
  auto dir = tmp_dir("cli_sim");
  auto cfgp = dir / "cfg.json";
  write_file_atomic(cfgp.string(), kBaseConfig);
  auto outdir = dir / "out";
  CHECK(run_cli({"simulate", "--config", cfgp.string(), "--out", outdir.string(),
                 "--threads", "2"}) == 0);
  CHECK(std::filesystem::exists(outdir / "results.csv"));
  CHECK(std::filesystem::exists(outdir / "config.json"));
}

TEST_CASE("cli metrics recomputes from saved labels") {
  auto dir = tmp_dir("metrics");
  auto labp = dir / "labels.csv";
  write_file_atomic(labp.string(), "truth,predicted\n1,1\n1,0\n0,0\n0,1\n");
  auto outp = dir / "m.json";
  CHECK(run_cli({"metrics", "--labels", labp.string(), "--out", outp.string()}) == 0);
  auto js = read_file(outp);
  CHECK(js.find("\"tp\":1") != std::string::npos);
  CHECK(js.find("\"precision\":0.5") != std::string::npos);
}

TEST_CASE("cli bench writes a timing table") {
  auto dir = tmp_dir("bench");
  auto outp = dir / "bench.csv";
  CHECK(run_cli({"bench", "--n", "20", "--p", "500", "--n0", "4", "--repeats", "3", "--rules",
                 "mandera,median,mean", "--out", outp.string()}) == 0);
  auto csv = read_file(outp);
  CHECK(csv.rfind("rule,n,p,n0,threads,repeats,mean_ms,sd_ms", 0) == 0);
  CHECK(csv.find("mandera,20,500,4,") != std::string::npos);
  CHECK(csv.find("median,") != std::string::npos);
}

TEST_CASE("cli verify-theory emits a passing report on a small case") {
  auto dir = tmp_dir("verify");
  auto outp = dir / "verify.json";
  CHECK(run_cli({"verify-theory", "--attack", "sign_flip", "--n", "40", "--n0", "10", "--rho",
                 "0.7", "--p", "2000,20000", "--replicates", "3", "--seed", "5", "--out",
                 outp.string()}) == 0);
  auto js = read_file(outp);
  CHECK(js.find("\"all_pass\":true") != std::string::npos);
}
