#include "mandera/federated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mandera/report.hpp"
#include "mandera/rng.hpp"

namespace mandera {

void FLConfig::validate() const {
  if (n < 2) throw std::invalid_argument("fl: need n >= 2 nodes");
  if (epochs < 1) throw std::invalid_argument("fl: need epochs >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("fl: learning_rate must be > 0");
  if (momentum < 0 || momentum >= 1) throw std::invalid_argument("fl: momentum in [0,1)");
  if (!full_batch && batch_size < 1) throw std::invalid_argument("fl: batch_size >= 1");
  if (dataset == DatasetKind::SyntheticBlobs) {
    if (classes < 2 || dim < 1 || per_node < 1 || holdout < 1)
      throw std::invalid_argument("fl: bad synthetic dataset parameters");
  } else {
    if (idx_images.empty() || idx_labels.empty())
      throw std::invalid_argument("fl: fashion_mnist needs idx_images and idx_labels paths");
  }
  if (model == ModelKind::Mlp && mlp_hidden < 1)
    throw std::invalid_argument("fl: mlp_hidden >= 1");
}

namespace {

struct Setup {
  std::vector<NodeDataset> nodes;  // label-flipped already when LF is active
  Dataset holdout;
  std::unique_ptr<Model> model;
};

Setup prepare(const FLConfig& cfg, const AttackSpec& attack) {
  cfg.validate();
  attack.validate(cfg.n);
  Setup s;
  if (cfg.dataset == DatasetKind::SyntheticBlobs) {
    s.nodes = generate_synthetic(cfg.classes, cfg.dim, cfg.per_node, cfg.n, cfg.seed);
    s.holdout = generate_synthetic_holdout(cfg.classes, cfg.dim, cfg.holdout, cfg.seed);
  } else {
    Dataset full = load_idx(cfg.idx_images, cfg.idx_labels);
    std::int64_t hold = std::min<std::int64_t>(cfg.holdout, full.rows / 10);
    Dataset train = full;
    train.rows = full.rows - hold;
    train.X.resize(static_cast<std::size_t>(train.rows) * full.d);
    train.y.resize(train.rows);
    s.holdout.d = full.d;
    s.holdout.num_classes = full.num_classes;
    s.holdout.rows = hold;
    s.holdout.X.assign(full.X.begin() + train.rows * full.d, full.X.end());
    s.holdout.y.assign(full.y.begin() + train.rows, full.y.end());
    s.nodes = shard_dataset(train, cfg.n);
  }
  if (attack.kind == AttackKind::LabelFlip) s.nodes = apply_label_flip(s.nodes, attack);
  int d = s.nodes[0].d;
  int k = s.nodes[0].num_classes;
  s.model = cfg.model == ModelKind::SoftmaxLinear ? make_softmax_model(d, k)
                                                  : make_mlp_model(d, cfg.mlp_hidden, k);
  return s;
}

std::vector<std::int64_t> epoch_batch(const FLConfig& cfg, std::int64_t rows, int epoch,
                                      int node) {
  std::vector<std::int64_t> idx(rows);
  std::iota(idx.begin(), idx.end(), 0);
  if (cfg.full_batch || rows <= cfg.batch_size) return idx;
  // without-replacement draw per (seed, epoch, node)
  Rng rng(cfg.seed, {0x6261746368ull, static_cast<std::uint64_t>(epoch),
                     static_cast<std::uint64_t>(node)});
  for (std::int64_t i = rows - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_below(static_cast<std::uint64_t>(i + 1))]);
  idx.resize(cfg.batch_size);
  return idx;
}

struct EpochOutput {
  MessageMatrix honest;
  double mean_loss = 0;
};

EpochOutput honest_epoch(const Setup& s, const FLConfig& cfg,
                         std::span<const double> params, int epoch) {
  EpochOutput out;
  out.honest = MessageMatrix(cfg.n, s.model->param_count());
  std::vector<double> grad(s.model->param_count());
  for (int i = 0; i < cfg.n; ++i) {
    auto batch = epoch_batch(cfg, s.nodes[i].rows, epoch, i);
    out.mean_loss += s.model->loss_and_gradient(params, s.nodes[i], batch, grad);
    std::copy(grad.begin(), grad.end(), out.honest.row(i).begin());
  }
  out.mean_loss /= cfg.n;
  return out;
}

}  // namespace

MessageMatrix federated_epoch_matrix(const FLConfig& config, const AttackSpec& attack,
                                     int epoch) {
  Setup s = prepare(config, attack);
  auto params = s.model->init_params(config.seed);
  return honest_epoch(s, config, params, epoch).honest;
}

RunLog run_federated(const FLConfig& config, const AttackSpec& attack,
                     const AggregationRule& rule, int threads) {
  Setup s = prepare(config, attack);
  rule.validate(config.n);

  const std::int64_t p = s.model->param_count();
  std::vector<double> params = s.model->init_params(config.seed);
  std::vector<double> velocity(p, 0.0);

  std::vector<int> truth(config.n, 0);
  for (int i : attack.malicious) truth[i] = 1;

  RunLog log;
  log.param_count = p;
  std::vector<int> all_nodes(config.n);
  std::iota(all_nodes.begin(), all_nodes.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochOutput honest = honest_epoch(s, config, params, epoch);
    AttackSpec epoch_attack = attack;
    epoch_attack.seed = derive_seed(attack.seed, {0x65706f6368ull,
                                                  static_cast<std::uint64_t>(epoch)});
    MessageMatrix m = apply_message_attack(honest.honest, epoch_attack);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.matrix_digest = matrix_digest(m);
    rec.loss = honest.mean_loss;

    std::vector<double> global;
    switch (rule.kind) {
      case AggregationKind::Mean:
        global = aggregate_mean(m, all_nodes);
        break;
      case AggregationKind::Krum: {
        int sel = krum_select(m, rule.assumed_f, threads);
        global.assign(m.row(sel).begin(), m.row(sel).end());
        break;
      }
      case AggregationKind::Bulyan:
        global = bulyan(m, rule.assumed_f, threads);
        break;
      case AggregationKind::TrimmedMean:
        global = trimmed_mean(m, rule.trim_beta);
        break;
      case AggregationKind::Median:
        global = coordinate_median(m);
        break;
      case AggregationKind::ManderaThenMean: {
        DetectionResult det = detect(m, threads);
        rec.detection = confusion_from_labels(truth, det.labels);
        rec.detection_rule = malicious_rule_name(det.rule);
        rec.detection_ambiguous = det.ambiguous;
        std::vector<int> keep;
        for (int i = 0; i < config.n; ++i)
          if (!det.labels[i]) keep.push_back(i);
        if (keep.empty()) keep = all_nodes;  // refuse to drop everyone
        global = aggregate_mean(m, keep);
        break;
      }
    }

    // flush aggregate components below the summation noise floor (n adds of
    // entries bounded by the matrix magnitude); a zero-sum attack would
    // otherwise leave structured 1e-17 dust that argmax prediction amplifies
    double scale = 0;
    for (double v : m.values) scale = std::max(scale, std::fabs(v));
    const double noise_floor =
        16.0 * config.n * std::numeric_limits<double>::epsilon() * scale;
    for (double& g : global)
      if (std::fabs(g) < noise_floor) g = 0.0;

    for (std::int64_t j = 0; j < p; ++j) {
      velocity[j] = config.momentum * velocity[j] + global[j];
      params[j] -= config.learning_rate * velocity[j];
    }

    rec.accuracy = s.model->accuracy(params, s.holdout);
    log.epochs.push_back(std::move(rec));
  }
  log.final_accuracy = log.epochs.back().accuracy;
  log.final_params = std::move(params);
  return log;
}

double centralized_baseline_accuracy(const FLConfig& config) {
  AttackSpec none;
  Setup s = prepare(config, none);
  Dataset pooled;
  pooled.d = s.nodes[0].d;
  pooled.num_classes = s.nodes[0].num_classes;
  for (const auto& nd : s.nodes) {
    pooled.rows += nd.rows;
    pooled.X.insert(pooled.X.end(), nd.X.begin(), nd.X.end());
    pooled.y.insert(pooled.y.end(), nd.y.begin(), nd.y.end());
  }
  const std::int64_t p = s.model->param_count();
  std::vector<double> params = s.model->init_params(config.seed);
  std::vector<double> velocity(p, 0.0), grad(p);
  std::vector<std::int64_t> all(pooled.rows);
  std::iota(all.begin(), all.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    s.model->loss_and_gradient(params, pooled, all, grad);
    for (std::int64_t j = 0; j < p; ++j) {
      velocity[j] = config.momentum * velocity[j] + grad[j];
      params[j] -= config.learning_rate * velocity[j];
    }
  }
  return s.model->accuracy(params, s.holdout);
}

std::string RunLog::to_jsonl() const {
  std::ostringstream os;
  for (const auto& r : epochs) {
    os << "{\"epoch\":" << r.epoch << ",\"digest\":\"" << r.matrix_digest << "\",\"loss\":"
       << format_double(r.loss) << ",\"accuracy\":" << format_double(r.accuracy);
    if (r.detection) {
      os << ",\"detection\":{\"tp\":" << r.detection->tp << ",\"fp\":" << r.detection->fp
         << ",\"fn\":" << r.detection->fn << ",\"tn\":" << r.detection->tn << ",\"rule\":\""
         << r.detection_rule << "\",\"ambiguous\":" << (r.detection_ambiguous ? "true" : "false")
         << "}";
    }
    os << "}\n";
  }
  return os.str();
}

std::string RunLog::to_summary_csv() const {
  std::ostringstream os;
  os << "epoch,accuracy,loss,detected_tp,detected_fp,detected_fn,detected_tn\n";
  for (const auto& r : epochs) {
    os << r.epoch << "," << format_double(r.accuracy) << "," << format_double(r.loss) << ",";
    if (r.detection)
      os << r.detection->tp << "," << r.detection->fp << "," << r.detection->fn << ","
         << r.detection->tn;
    else
      os << ",,,";
    os << "\n";
  }
  return os.str();
}

}  // namespace mandera
