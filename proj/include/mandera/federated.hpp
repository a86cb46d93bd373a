#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mandera/aggregate.hpp"
#include "mandera/attack.hpp"
#include "mandera/dataset.hpp"
#include "mandera/detect.hpp"
#include "mandera/metrics.hpp"
#include "mandera/model.hpp"

namespace mandera {

enum class ModelKind { SoftmaxLinear, Mlp };
enum class DatasetKind { SyntheticBlobs, FashionMnist };

struct FLConfig {
  int n = 100;
  int epochs = 25;
  double learning_rate = 0.01;
  double momentum = 0.5;
  int batch_size = 10;       // ignored in full-batch mode
  bool full_batch = false;
  std::uint64_t seed = 0;

  ModelKind model = ModelKind::SoftmaxLinear;
  int mlp_hidden = 32;

  DatasetKind dataset = DatasetKind::SyntheticBlobs;
  // SyntheticBlobs parameters
  int classes = 10;
  int dim = 64;
  std::int64_t per_node = 500;
  std::int64_t holdout = 1000;
  // FashionMnist paths (train images/labels; holdout is carved from the tail)
  std::string idx_images, idx_labels;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  std::string matrix_digest;
  double loss = 0;       // mean node training loss on the epoch's batches
  double accuracy = 0;   // holdout accuracy after the update
  std::optional<ConfusionCounts> detection;  // present for ManderaThenMean
  std::string detection_rule;
  bool detection_ambiguous = false;
};

struct RunLog {
  std::vector<EpochRecord> epochs;
  double final_accuracy = 0;
  std::int64_t param_count = 0;
  std::vector<double> final_params;

  std::string to_jsonl() const;
  std::string to_summary_csv() const;  // epoch,accuracy,loss,detected_tp,...
};

/// One federated run: per epoch every node computes its honest gradient row,
/// the attack rewrites rows (GA/SF/ZG) or has already poisoned node data
/// (LF), the defense aggregates, and the globals update by momentum SGD
/// (u <- momentum*u + g; theta <- theta - lr*u). Fully reproducible from
/// (config, attack, rule).
RunLog run_federated(const FLConfig& config, const AttackSpec& attack,
                     const AggregationRule& rule, int threads = 1);

/// Builds the honest message matrix of a single epoch (no attack applied),
/// with node data already label-flipped when the attack says so. Used for
/// stand-alone detection studies on genuine gradients.
MessageMatrix federated_epoch_matrix(const FLConfig& config, const AttackSpec& attack,
                                     int epoch = 0);

/// Full-batch gradient descent on the pooled node data with the same
/// optimizer settings; reference point for the federated runs.
double centralized_baseline_accuracy(const FLConfig& config);

}  // namespace mandera
