#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mandera/dataset.hpp"
#include "mandera/matrix.hpp"

namespace mandera {

enum class AttackKind { None, Gaussian, SignFlip, ZeroGradient, LabelFlip };

const char* attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& name);

/// Description of one attack. GA/SF/ZG rewrite malicious rows of a completed
/// honest message matrix (the attacker observes the current epoch's benign
/// gradients); LF poisons node-local labels before training.
struct AttackSpec {
  AttackKind kind = AttackKind::None;
  std::vector<int> malicious;      // node indices, strictly minority enforced at detection
  double gaussian_variance = 30.0; // GA: Sigma = gaussian_variance * I
  double ratio_r = 3.0;            // SF: rows become -r * benign mean
  std::vector<int> label_map;      // LF: permutation of {0..K-1}; empty = y -> K-1-y
  std::uint64_t seed = 0;

  /// Validates against a node count; throws std::invalid_argument.
  void validate(int n) const;

  std::vector<int> benign_set(int n) const;
};

/// Per-column arithmetic mean over the given rows. Throws if the set is empty.
std::vector<double> benign_mean(const MessageMatrix& m, std::span<const int> benign_rows);

/// Malicious rows replaced by independent N(m_b, gaussian_variance * I) draws
/// computed from the pre-attack benign rows. Deterministic given spec.seed.
MessageMatrix apply_gaussian(const MessageMatrix& m, const AttackSpec& spec);

/// Every malicious row set to -ratio_r * m_b (all malicious rows identical).
MessageMatrix apply_sign_flip(const MessageMatrix& m, const AttackSpec& spec);

/// Sign flip with r = n1/n0, which drives every post-attack column sum to 0.
MessageMatrix apply_zero_gradient(const MessageMatrix& m, const AttackSpec& spec);

/// Relabels every sample held by a malicious node through the label map
/// (default involution y -> K-1-y); features untouched, benign nodes untouched.
std::vector<NodeDataset> apply_label_flip(const std::vector<NodeDataset>& nodes,
                                          const AttackSpec& spec);

/// Dispatch for message-level attacks; None and LabelFlip return m unchanged.
MessageMatrix apply_message_attack(const MessageMatrix& m, const AttackSpec& spec);

}  // namespace mandera
