#include "mandera/experiment.hpp"

#include <filesystem>
#include <sstream>

#include "mandera/detect.hpp"
#include "mandera/experiment.hpp"
#include "mandera/federated.hpp"
#include "mandera/metrics.hpp"
#include "mandera/report.hpp"
#include "mandera/rng.hpp"
#include "mandera/stats.hpp"

namespace mandera {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write(ExperimentSummary& summary, const std::string& path, const std::string& content) {
  write_file_atomic(path, content);
  summary.files_written.push_back(path);
}

AggregationRule resolved_rule(const ExperimentConfig& cfg, const AttackSpec& attack) {
  AggregationRule rule = cfg.defense;
  if (cfg.defense_f_is_default) {
    int n0 = static_cast<int>(attack.malicious.size());
    rule.assumed_f = n0;
    rule.trim_beta = n0;
  }
  return rule;
}

std::string boxplot_rows(const std::string& prefix,
                         const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  std::ostringstream os;
  for (const auto& [metric, values] : series) {
    if (values.empty()) continue;
    auto bs = boxplot_stats(values);
    os << prefix << metric << "," << format_double(bs.q1) << "," << format_double(bs.median)
       << "," << format_double(bs.q3) << "," << format_double(bs.lo_whisker) << ","
       << format_double(bs.hi_whisker) << "\n";
  }
  return os.str();
}

ExperimentSummary run_simulate(const ExperimentConfig& cfg, int threads) {
  ExperimentSummary summary;
  ensure_directory(cfg.out_dir);
  write(summary, join_path(cfg.out_dir, "config.json"), cfg.to_json());

  std::ostringstream results;
  results << "replicate,final_accuracy,final_loss,detect_precision,detect_recall,"
             "detect_accuracy,detect_f1\n";
  std::vector<double> accs, precs, recalls;
  for (int r = 0; r < cfg.replicates; ++r) {
    AttackSpec attack = cfg.attack_for_replicate(r);
    FLConfig fl = cfg.fl;
    fl.seed = derive_seed(cfg.seed, {0x666cull, static_cast<std::uint64_t>(r)});
    AggregationRule rule = resolved_rule(cfg, attack);
    RunLog log = run_federated(fl, attack, rule, threads);

    std::string tag = "replicate_" + std::to_string(r);
    write(summary, join_path(cfg.out_dir, tag + "_runlog.jsonl"), log.to_jsonl());
    write(summary, join_path(cfg.out_dir, tag + "_summary.csv"), log.to_summary_csv());

    results << r << "," << format_double(log.final_accuracy) << ","
            << format_double(log.epochs.back().loss);
    accs.push_back(log.final_accuracy);
    if (log.epochs.back().detection) {
      auto m = metrics(*log.epochs.back().detection);
      results << "," << format_double(m.precision) << "," << format_double(m.recall) << ","
              << format_double(m.accuracy) << "," << format_double(m.f1);
      precs.push_back(m.precision);
      recalls.push_back(m.recall);
    } else {
      results << ",,,,";
    }
    results << "\n";
  }
  write(summary, join_path(cfg.out_dir, "results.csv"), results.str());

  std::ostringstream box;
  box << "metric,q1,median,q3,lo_whisker,hi_whisker\n";
  box << boxplot_rows("", {{"final_accuracy", accs},
                           {"detect_precision", precs},
                           {"detect_recall", recalls}});
  write(summary, join_path(cfg.out_dir, "boxplot.csv"), box.str());
  return summary;
}

}  // namespace

ExperimentSummary run_detect_grid(const ExperimentConfig& cfg, const DetectGrid& grid,
                                  int threads) {
  ExperimentSummary summary;
  ensure_directory(cfg.out_dir);
  write(summary, join_path(cfg.out_dir, "config.json"), cfg.to_json());

  std::ostringstream rows;
  rows << "attack,n0,replicate,tp,fp,fn,tn,precision,recall,accuracy,f1,rule,ambiguous\n";
  std::ostringstream box;
  box << "attack,n0,metric,q1,median,q3,lo_whisker,hi_whisker\n";

  for (const auto& attack_name : grid.attacks) {
    for (int n0 : grid.malicious_counts) {
      std::vector<double> precs, recalls, f1s, accs;
      for (int r = 0; r < cfg.replicates; ++r) {
        ExperimentConfig cell = cfg;
        cell.attack.kind = attack_kind_from_name(attack_name);
        cell.malicious_count = n0;
        cell.attack.malicious.clear();
        AttackSpec attack = cell.attack_for_replicate(r);
        FLConfig fl = cell.fl;
        fl.seed = derive_seed(cfg.seed, {0x6772696467ull, static_cast<std::uint64_t>(n0),
                                         static_cast<std::uint64_t>(r),
                                         static_cast<std::uint64_t>(attack.kind)});
        MessageMatrix honest = federated_epoch_matrix(fl, attack, 0);
        MessageMatrix m = apply_message_attack(honest, attack);
        DetectionResult det = detect(m, threads);

        std::vector<int> truth(fl.n, 0);
        for (int i : attack.malicious) truth[i] = 1;
        auto counts = confusion_from_labels(truth, det.labels);
        auto mt = metrics(counts);
        rows << attack_name << "," << n0 << "," << r << "," << counts.tp << "," << counts.fp
             << "," << counts.fn << "," << counts.tn << "," << format_double(mt.precision)
             << "," << format_double(mt.recall) << "," << format_double(mt.accuracy) << ","
             << format_double(mt.f1) << "," << malicious_rule_name(det.rule) << ","
             << (det.ambiguous ? "1" : "0") << "\n";
        precs.push_back(mt.precision);
        recalls.push_back(mt.recall);
        f1s.push_back(mt.f1);
        accs.push_back(mt.accuracy);

        if (r == 0) {
          NodeMoments mo = node_moments(m, threads);
          std::ostringstream sc;
          sc << "node,e,s,truth\n";
          for (int i = 0; i < fl.n; ++i)
            sc << i << "," << format_double(mo.e[i]) << "," << format_double(mo.s[i]) << ","
               << truth[i] << "\n";
          write(summary,
                join_path(cfg.out_dir, "moments_" + attack_name + "_" + std::to_string(n0) + ".csv"),
                sc.str());
        }
      }
      std::string prefix = attack_name + "," + std::to_string(n0) + ",";
      box << boxplot_rows(prefix, {{"precision", precs},
                                   {"recall", recalls},
                                   {"f1", f1s},
                                   {"accuracy", accs}});
    }
  }
  write(summary, join_path(cfg.out_dir, "detect_results.csv"), rows.str());
  write(summary, join_path(cfg.out_dir, "detect_boxplot.csv"), box.str());
  return summary;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  if (cfg.out_dir.empty())
    throw std::invalid_argument("experiment: output directory is required");
  if (cfg.mode == "simulate") return run_simulate(cfg, threads);
  return run_detect_grid(cfg, DetectGrid{}, threads);
}

}  // namespace mandera
