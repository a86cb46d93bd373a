#include "mandera/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mandera/rng.hpp"

namespace mandera {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + where);
}

ModelKind model_kind_from_name(const std::string& s) {
  if (s == "softmax") return ModelKind::SoftmaxLinear;
  if (s == "mlp") return ModelKind::Mlp;
  throw std::invalid_argument("config: unknown model type: " + s);
}

DatasetKind dataset_kind_from_name(const std::string& s) {
  if (s == "synthetic_blobs") return DatasetKind::SyntheticBlobs;
  if (s == "fashion_mnist") return DatasetKind::FashionMnist;
  throw std::invalid_argument("config: unknown dataset type: " + s);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  reject_unknown_keys(doc, {"dataset", "model", "fl", "attack", "defense", "replicates",
                            "seed", "out", "mode"},
                      "top level");
  ExperimentConfig cfg;

  if (doc.contains("dataset")) {
    const json& d = doc["dataset"];
    reject_unknown_keys(d, {"type", "classes", "dim", "per_node", "holdout", "images", "labels"},
                        "dataset");
    cfg.fl.dataset = dataset_kind_from_name(d.value("type", "synthetic_blobs"));
    cfg.fl.classes = d.value("classes", cfg.fl.classes);
    cfg.fl.dim = d.value("dim", cfg.fl.dim);
    cfg.fl.per_node = d.value("per_node", cfg.fl.per_node);
    cfg.fl.holdout = d.value("holdout", cfg.fl.holdout);
    cfg.fl.idx_images = d.value("images", "");
    cfg.fl.idx_labels = d.value("labels", "");
  }

  if (doc.contains("model")) {
    const json& mo = doc["model"];
    reject_unknown_keys(mo, {"type", "hidden"}, "model");
    cfg.fl.model = model_kind_from_name(mo.value("type", "softmax"));
    cfg.fl.mlp_hidden = mo.value("hidden", cfg.fl.mlp_hidden);
  }

  if (doc.contains("fl")) {
    const json& f = doc["fl"];
    reject_unknown_keys(f, {"nodes", "epochs", "learning_rate", "momentum", "batch_size",
                            "full_batch"},
                        "fl");
    cfg.fl.n = f.value("nodes", cfg.fl.n);
    cfg.fl.epochs = f.value("epochs", cfg.fl.epochs);
    cfg.fl.learning_rate = f.value("learning_rate", cfg.fl.learning_rate);
    cfg.fl.momentum = f.value("momentum", cfg.fl.momentum);
    cfg.fl.batch_size = f.value("batch_size", cfg.fl.batch_size);
    cfg.fl.full_batch = f.value("full_batch", cfg.fl.full_batch);
  }

  if (doc.contains("attack")) {
    const json& a = doc["attack"];
    reject_unknown_keys(a, {"kind", "malicious_count", "malicious_nodes", "variance", "ratio",
                            "label_map"},
                        "attack");
    cfg.attack.kind = attack_kind_from_name(a.value("kind", "none"));
    if (a.contains("malicious_count") && a.contains("malicious_nodes"))
      throw std::invalid_argument("config: give malicious_count or malicious_nodes, not both");
    if (a.contains("malicious_count")) cfg.malicious_count = a["malicious_count"].get<int>();
    if (a.contains("malicious_nodes"))
      cfg.attack.malicious = a["malicious_nodes"].get<std::vector<int>>();
    cfg.attack.gaussian_variance = a.value("variance", cfg.attack.gaussian_variance);
    cfg.attack.ratio_r = a.value("ratio", cfg.attack.ratio_r);
    if (a.contains("label_map")) cfg.attack.label_map = a["label_map"].get<std::vector<int>>();
  }

  if (doc.contains("defense")) {
    const json& d = doc["defense"];
    reject_unknown_keys(d, {"rule", "assumed_f", "trim_beta"}, "defense");
    cfg.defense.kind = aggregation_kind_from_name(d.value("rule", "mean"));
    if (d.contains("assumed_f")) {
      cfg.defense.assumed_f = d["assumed_f"].get<int>();
      cfg.defense_f_is_default = false;
    }
    if (d.contains("trim_beta")) {
      cfg.defense.trim_beta = d["trim_beta"].get<int>();
      cfg.defense_f_is_default = false;
    }
  }

  cfg.replicates = doc.value("replicates", 1);
  cfg.seed = doc.value("seed", 0ull);
  cfg.out_dir = doc.value("out", "");
  cfg.mode = doc.value("mode", "simulate");
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void ExperimentConfig::validate() const {
  fl.validate();
  if (replicates < 1) throw std::invalid_argument("config: replicates >= 1");
  if (mode != "simulate" && mode != "detect-grid")
    throw std::invalid_argument("config: mode must be simulate or detect-grid");
  if (malicious_count >= 0) {
    if (!attack.malicious.empty())
      throw std::invalid_argument("config: malicious_count and explicit nodes are exclusive");
    if (malicious_count >= (fl.n + 1) / 2)
      throw std::invalid_argument("config: malicious_count must be a strict minority of n");
  } else {
    attack.validate(fl.n);
    if (2 * static_cast<int>(attack.malicious.size()) >= fl.n + 1)
      throw std::invalid_argument("config: malicious nodes must be a strict minority of n");
  }
}

AttackSpec ExperimentConfig::attack_for_replicate(int replicate) const {
  AttackSpec spec = attack;
  spec.seed = derive_seed(seed, {0x617474616b6bull, static_cast<std::uint64_t>(replicate)});
  if (malicious_count >= 0) {
    Rng rng(seed, {0x73756273ull, static_cast<std::uint64_t>(replicate)});
    std::vector<int> nodes(fl.n);
    for (int i = 0; i < fl.n; ++i) nodes[i] = i;
    for (int i = fl.n - 1; i > 0; --i)
      std::swap(nodes[i], nodes[rng.uniform_below(static_cast<std::uint64_t>(i + 1))]);
    spec.malicious.assign(nodes.begin(), nodes.begin() + malicious_count);
    std::sort(spec.malicious.begin(), spec.malicious.end());
  }
  return spec;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json doc;
  doc["dataset"]["type"] =
      fl.dataset == DatasetKind::SyntheticBlobs ? "synthetic_blobs" : "fashion_mnist";
  if (fl.dataset == DatasetKind::SyntheticBlobs) {
    doc["dataset"]["classes"] = fl.classes;
    doc["dataset"]["dim"] = fl.dim;
    doc["dataset"]["per_node"] = fl.per_node;
    doc["dataset"]["holdout"] = fl.holdout;
  } else {
    doc["dataset"]["images"] = fl.idx_images;
    doc["dataset"]["labels"] = fl.idx_labels;
  }
  doc["model"]["type"] = fl.model == ModelKind::SoftmaxLinear ? "softmax" : "mlp";
  if (fl.model == ModelKind::Mlp) doc["model"]["hidden"] = fl.mlp_hidden;
  doc["fl"] = {{"nodes", fl.n},
               {"epochs", fl.epochs},
               {"learning_rate", fl.learning_rate},
               {"momentum", fl.momentum},
               {"batch_size", fl.batch_size},
               {"full_batch", fl.full_batch}};
  doc["attack"]["kind"] = attack_kind_name(attack.kind);
  if (malicious_count >= 0)
    doc["attack"]["malicious_count"] = malicious_count;
  else
    doc["attack"]["malicious_nodes"] = attack.malicious;
  doc["attack"]["variance"] = attack.gaussian_variance;
  doc["attack"]["ratio"] = attack.ratio_r;
  if (!attack.label_map.empty()) doc["attack"]["label_map"] = attack.label_map;
  doc["defense"]["rule"] = aggregation_kind_name(defense.kind);
  if (!defense_f_is_default) {
    doc["defense"]["assumed_f"] = defense.assumed_f;
    doc["defense"]["trim_beta"] = defense.trim_beta;
  }
  doc["replicates"] = replicates;
  doc["seed"] = seed;
  doc["mode"] = mode;
  return doc.dump(2);
}

}  // namespace mandera
