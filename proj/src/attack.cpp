#include "mandera/attack.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mandera/rng.hpp"

namespace mandera {

const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::None: return "none";
    case AttackKind::Gaussian: return "gaussian";
    case AttackKind::SignFlip: return "sign_flip";
    case AttackKind::ZeroGradient: return "zero_gradient";
    case AttackKind::LabelFlip: return "label_flip";
  }
  return "?";
}

AttackKind attack_kind_from_name(const std::string& name) {
  if (name == "none") return AttackKind::None;
  if (name == "gaussian") return AttackKind::Gaussian;
  if (name == "sign_flip") return AttackKind::SignFlip;
  if (name == "zero_gradient") return AttackKind::ZeroGradient;
  if (name == "label_flip") return AttackKind::LabelFlip;
  throw std::invalid_argument("unknown attack kind: " + name);
}

void AttackSpec::validate(int n) const {
  std::set<int> seen;
  for (int i : malicious) {
    if (i < 0 || i >= n)
      throw std::invalid_argument("attack: malicious index " + std::to_string(i) +
                                  " out of range for n=" + std::to_string(n));
    if (!seen.insert(i).second)
      throw std::invalid_argument("attack: duplicate malicious index " + std::to_string(i));
  }
  if (static_cast<int>(malicious.size()) >= n)
    throw std::invalid_argument("attack: malicious set must leave at least one benign node");
  if (kind == AttackKind::Gaussian && !(gaussian_variance > 0.0))
    throw std::invalid_argument("attack: gaussian_variance must be > 0");
  if (kind == AttackKind::SignFlip && !(ratio_r > 0.0))
    throw std::invalid_argument("attack: ratio_r must be > 0");
  if (kind == AttackKind::LabelFlip && !label_map.empty()) {
    std::vector<int> sorted = label_map;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < static_cast<int>(sorted.size()); ++k)
      if (sorted[k] != k)
        throw std::invalid_argument("attack: label_map is not a permutation of 0..K-1");
  }
}

std::vector<int> AttackSpec::benign_set(int n) const {
  std::vector<int> out;
  std::vector<char> bad(n, 0);
  for (int i : malicious) bad[i] = 1;
  for (int i = 0; i < n; ++i)
    if (!bad[i]) out.push_back(i);
  return out;
}

std::vector<double> benign_mean(const MessageMatrix& m, std::span<const int> benign_rows) {
  if (benign_rows.empty()) throw std::invalid_argument("benign_mean: empty benign set");
  std::vector<double> mean(m.p, 0.0);
  for (int i : benign_rows) {
    const double* row = m.values.data() + static_cast<std::size_t>(i) * m.p;
    for (std::int64_t j = 0; j < m.p; ++j) mean[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(benign_rows.size());
  for (double& v : mean) v *= inv;
  return mean;
}

MessageMatrix apply_gaussian(const MessageMatrix& m, const AttackSpec& spec) {
  if (spec.kind != AttackKind::Gaussian)
    throw std::invalid_argument("apply_gaussian: spec kind mismatch");
  auto benign = spec.benign_set(m.n);
  std::vector<double> mb = benign_mean(m, benign);
  MessageMatrix out = m;
  const double sd = std::sqrt(spec.gaussian_variance);
  Rng rng(spec.seed, {0x6761757373ull});
  for (int i : spec.malicious) {
    double* row = out.values.data() + static_cast<std::size_t>(i) * m.p;
    for (std::int64_t j = 0; j < m.p; ++j) row[j] = mb[j] + sd * rng.normal();
  }
  return out;
}

MessageMatrix apply_sign_flip(const MessageMatrix& m, const AttackSpec& spec) {
  if (spec.kind != AttackKind::SignFlip)
    throw std::invalid_argument("apply_sign_flip: spec kind mismatch");
  auto benign = spec.benign_set(m.n);
  std::vector<double> mb = benign_mean(m, benign);
  for (double& v : mb) v *= -spec.ratio_r;
  MessageMatrix out = m;
  for (int i : spec.malicious) {
    double* row = out.values.data() + static_cast<std::size_t>(i) * m.p;
    std::copy(mb.begin(), mb.end(), row);
  }
  return out;
}

// Sign flip at r = n1/n0. Computed per column as -(benign sum)/n0, which is
// the same value in exact arithmetic; going through the rounded constant
// n1/n0 instead would give every column a rounding residual proportional to
// the benign mean, and that correlated 1e-17 drift turns into systematic
// gradient ascent once the means are aggregated over many epochs.
MessageMatrix apply_zero_gradient(const MessageMatrix& m, const AttackSpec& spec) {
  if (spec.kind != AttackKind::ZeroGradient)
    throw std::invalid_argument("apply_zero_gradient: spec kind mismatch");
  const int n0 = static_cast<int>(spec.malicious.size());
  if (n0 == 0) throw std::invalid_argument("apply_zero_gradient: empty malicious set");
  auto benign = spec.benign_set(m.n);
  std::vector<double> row(m.p, 0.0);
  for (int i : benign) {
    const double* src = m.values.data() + static_cast<std::size_t>(i) * m.p;
    for (std::int64_t j = 0; j < m.p; ++j) row[j] += src[j];
  }
  for (double& v : row) v = -v / static_cast<double>(n0);
  MessageMatrix out = m;
  for (int i : spec.malicious) {
    double* dst = out.values.data() + static_cast<std::size_t>(i) * m.p;
    std::copy(row.begin(), row.end(), dst);
  }
  return out;
}

std::vector<NodeDataset> apply_label_flip(const std::vector<NodeDataset>& nodes,
                                          const AttackSpec& spec) {
  if (spec.kind != AttackKind::LabelFlip)
    throw std::invalid_argument("apply_label_flip: spec kind mismatch");
  if (nodes.empty()) throw std::invalid_argument("apply_label_flip: no node data");
  const int num_classes = nodes[0].num_classes;
  std::vector<int> map = spec.label_map;
  if (map.empty()) {
    map.resize(num_classes);
    for (int k = 0; k < num_classes; ++k) map[k] = num_classes - 1 - k;
  }
  if (static_cast<int>(map.size()) != num_classes)
    throw std::invalid_argument("apply_label_flip: label_map size != class count");
  {
    std::vector<int> sorted = map;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < num_classes; ++k)
      if (sorted[k] != k)
        throw std::invalid_argument("apply_label_flip: label_map is not a permutation");
  }
  std::vector<NodeDataset> out = nodes;
  for (int i : spec.malicious) {
    if (i < 0 || i >= static_cast<int>(nodes.size()))
      throw std::invalid_argument("apply_label_flip: malicious index out of range");
    for (auto& y : out[i].y) y = map[y];
  }
  return out;
}

MessageMatrix apply_message_attack(const MessageMatrix& m, const AttackSpec& spec) {
  spec.validate(m.n);
  switch (spec.kind) {
    case AttackKind::Gaussian: return apply_gaussian(m, spec);
    case AttackKind::SignFlip: return apply_sign_flip(m, spec);
    case AttackKind::ZeroGradient: return apply_zero_gradient(m, spec);
    case AttackKind::None:
    case AttackKind::LabelFlip: return m;
  }
  return m;
}

}  // namespace mandera
