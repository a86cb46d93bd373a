#pragma once

#include <cstdint>
#include <string>

#include "mandera/aggregate.hpp"
#include "mandera/attack.hpp"
#include "mandera/federated.hpp"

namespace mandera {

/// One experiment: dataset/model block, attack block, defense block,
/// replicate count, seed, output directory. Parsed from a single JSON
/// document; unknown keys are rejected so a typo cannot silently change an
/// experiment.
struct ExperimentConfig {
  FLConfig fl;
  AttackSpec attack;
  int malicious_count = -1;  // when set, the malicious subset is drawn per replicate
  AggregationRule defense;
  bool defense_f_is_default = true;  // assumed_f/trim_beta follow the true count
  int replicates = 1;
  std::uint64_t seed = 0;
  std::string out_dir;

  // "simulate" runs the FL loop; "detect-grid" detects on single-epoch
  // matrices over an attack/count grid without training in the loop.
  std::string mode = "simulate";

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;
  void validate() const;

  /// Attack spec with the malicious subset resolved for one replicate.
  AttackSpec attack_for_replicate(int replicate) const;
};

}  // namespace mandera
