#pragma once

#include <string>
#include <vector>

#include "mandera/config.hpp"

namespace mandera {

struct ExperimentSummary {
  std::vector<std::string> files_written;
};

/// Runs the configured experiment and writes its report files under
/// cfg.out_dir (created if missing). All writes are atomic; reruns with the
/// same config produce byte-identical files.
///
/// mode "simulate": `replicates` federated runs (run-log JSONL + summary CSV
/// per replicate, results.csv and boxplot.csv across replicates).
/// mode "detect-grid": single-epoch detection over a grid of attacks and
/// malicious counts (detect_results.csv, detect_boxplot.csv, per-cell
/// moment scatters).
ExperimentSummary run_experiment(const ExperimentConfig& cfg, int threads = 1);

/// Grid used by detect-grid mode (fixed order for reproducible outputs).
struct DetectGrid {
  std::vector<std::string> attacks = {"gaussian", "sign_flip", "zero_gradient", "label_flip"};
  std::vector<int> malicious_counts = {5, 10, 15, 20, 25, 30};
};

ExperimentSummary run_detect_grid(const ExperimentConfig& cfg, const DetectGrid& grid,
                                  int threads = 1);

}  // namespace mandera
