#include "mandera/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mandera/bench.hpp"
#include "mandera/config.hpp"
#include "mandera/detect.hpp"
#include "mandera/experiment.hpp"
#include "mandera/matrix.hpp"
#include "mandera/metrics.hpp"
#include "mandera/report.hpp"
#include "mandera/rng.hpp"
#include "mandera/theory.hpp"

namespace mandera {

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int threads = 1;
};

void emit(const std::string& out, const std::string& content) {
  if (out.empty())
    std::cout << content << "\n";
  else
    write_file_atomic(out, content);
}

int do_simulate(const std::string& config_path, const CommonOpts& opts) {
  ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out.empty()) cfg.out_dir = opts.out;
  auto summary = run_experiment(cfg, opts.threads);
  std::cout << "wrote " << summary.files_written.size() << " files to " << cfg.out_dir << "\n";
  return 0;
}

int do_detect(const std::string& matrix_path, const CommonOpts& opts) {
  MessageMatrix m = load_matrix_any(matrix_path);
  DetectionResult det = detect(m, opts.threads);
  emit(opts.out, det.to_json());
  return 0;
}

int do_verify_theory(const std::string& attack_name, int n, int n0, double rho,
                     const std::vector<std::int64_t>& p_values, int replicates,
                     double sample_size, double sigma2, double variance,
                     const CommonOpts& opts) {
  AttackSpec attack;
  attack.kind = attack_kind_from_name(attack_name);
  if (attack.kind == AttackKind::LabelFlip || attack.kind == AttackKind::None)
    throw std::invalid_argument("verify-theory covers gaussian, sign_flip and zero_gradient");
  attack.gaussian_variance = variance;
  GradientModelOptions model_opts;
  model_opts.sample_size = sample_size;
  model_opts.sigma2 = sigma2;
  std::int64_t base_p = p_values.empty() ? 1000 : p_values.front();
  auto model = make_gradient_model(n, n0, base_p, rho, opts.seed, model_opts);
  auto report = verify_limits(model, attack, replicates, p_values, opts.seed, 5.0, opts.threads);
  emit(opts.out, report.to_json());
  return report.all_pass ? 0 : 1;
}

int do_bench(int n, std::int64_t p, int n0, int repeats, const std::string& rules_csv,
             const CommonOpts& opts) {
  GradientModelOptions model_opts;
  model_opts.sample_size = 100.0;
  auto model = make_gradient_model(n, n0, p, 0.5, opts.seed, model_opts);
  auto m = synth_benign(model, derive_seed(opts.seed, {1}));
  AttackSpec attack;
  attack.kind = AttackKind::Gaussian;
  attack.malicious = model.malicious;
  attack.gaussian_variance = 30.0;
  attack.seed = derive_seed(opts.seed, {2});
  m = apply_gaussian(m, attack);

  std::vector<std::string> rules;
  std::stringstream ss(rules_csv);
  std::string item;
  while (std::getline(ss, item, ',')) rules.push_back(item);
  auto table = bench_defenses(m, rules, repeats, n0, opts.threads);
  emit(opts.out, table.to_csv());
  return 0;
}

int do_metrics(const std::string& labels_path, const CommonOpts& opts) {
  std::ifstream in(labels_path);
  if (!in) throw std::invalid_argument("cannot open " + labels_path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("truth", 0) != 0)
    throw std::invalid_argument(labels_path + ": expected header truth,predicted");
  std::vector<int> truth, predicted;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument(labels_path + ": malformed row: " + line);
    truth.push_back(std::stoi(line.substr(0, comma)));
    predicted.push_back(std::stoi(line.substr(comma + 1)));
  }
  auto counts = confusion_from_labels(truth, predicted);
  auto mt = metrics(counts);
  std::ostringstream os;
  os << "{\"tp\":" << counts.tp << ",\"fp\":" << counts.fp << ",\"fn\":" << counts.fn
     << ",\"tn\":" << counts.tn << ",\"precision\":" << format_double(mt.precision)
     << ",\"recall\":" << format_double(mt.recall)
     << ",\"accuracy\":" << format_double(mt.accuracy) << ",\"f1\":" << format_double(mt.f1)
     << "}";
  emit(opts.out, os.str());
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"rank-domain malicious-node detection toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", opts.seed, "master RNG seed")->each([&](const std::string&) {
      opts.seed_set = true;
    });
    sub->add_option("--out", opts.out, "output file or directory");
    sub->add_option("--threads", opts.threads, "worker thread count")->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "run a configured experiment");
  std::string config_path;
  simulate->add_option("--config", config_path, "experiment config JSON")->required();
  add_common(simulate);

  auto* detect = app.add_subcommand("detect", "detect malicious rows in a saved matrix");
  std::string matrix_path;
  detect->add_option("--matrix", matrix_path, "message matrix (MNDM binary or CSV)")->required();
  add_common(detect);

  auto* verify = app.add_subcommand("verify-theory", "Monte Carlo check of the rank limits");
  std::string attack_name = "sign_flip";
  int vt_n = 100, vt_n0 = 30, vt_reps = 5;
  double vt_rho = 0.7, vt_sample_size = 10000.0, vt_sigma2 = 1.0, vt_variance = 30.0;
  std::vector<std::int64_t> vt_p = {1000, 10000, 100000};
  verify->add_option("--attack", attack_name, "gaussian | sign_flip | zero_gradient");
  verify->add_option("--n", vt_n, "node count");
  verify->add_option("--n0", vt_n0, "malicious count");
  verify->add_option("--rho", vt_rho, "positive-mean dimension fraction");
  verify->add_option("--p", vt_p, "matrix widths to test")->delimiter(',');
  verify->add_option("--replicates", vt_reps, "replicates per width");
  verify->add_option("--sample-size", vt_sample_size, "per-node sample size N_i");
  verify->add_option("--sigma2", vt_sigma2, "per-dimension gradient variance");
  verify->add_option("--variance", vt_variance, "gaussian attack variance");
  add_common(verify);

  auto* bench = app.add_subcommand("bench", "time defense functions on one matrix");
  int b_n = 100, b_n0 = 30, b_repeats = 100;
  std::int64_t b_p = 100000;
  std::string b_rules = "mandera,krum,bulyan,trimmed_mean,median,mean";
  bench->add_option("--n", b_n, "node count");
  bench->add_option("--p", b_p, "parameter count");
  bench->add_option("--n0", b_n0, "malicious count");
  bench->add_option("--repeats", b_repeats, "timed repeats per rule");
  bench->add_option("--rules", b_rules, "comma-separated rule list");
  add_common(bench);

  auto* metrics_cmd = app.add_subcommand("metrics", "recompute metrics from saved labels");
  std::string labels_path;
  metrics_cmd->add_option("--labels", labels_path, "CSV with truth,predicted columns")->required();
  add_common(metrics_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are validation errors
  }

  try {
    if (simulate->parsed()) return do_simulate(config_path, opts);
    if (detect->parsed()) return do_detect(matrix_path, opts);
    if (verify->parsed())
      return do_verify_theory(attack_name, vt_n, vt_n0, vt_rho, vt_p, vt_reps, vt_sample_size,
                              vt_sigma2, vt_variance, opts);
    if (bench->parsed()) return do_bench(b_n, b_p, b_n0, b_repeats, b_rules, opts);
    if (metrics_cmd->parsed()) return do_metrics(labels_path, opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mandera
