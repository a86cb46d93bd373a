#include "mandera/dataset.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mandera/rng.hpp"

namespace mandera {

namespace {

std::vector<double> draw_class_means(int num_classes, int d, std::uint64_t seed) {
  Rng rng(seed, {0x636c61737365ull});  // class means, drawn once per seed
  std::vector<double> means(static_cast<std::size_t>(num_classes) * d);
  for (auto& v : means) v = 3.0 * rng.normal();
  return means;
}

Dataset draw_blob_samples(const std::vector<double>& means, int num_classes, int d,
                          std::int64_t rows, Rng& rng) {
  Dataset ds;
  ds.d = d;
  ds.num_classes = num_classes;
  ds.rows = rows;
  ds.X.resize(static_cast<std::size_t>(rows) * d);
  ds.y.resize(rows);
  for (std::int64_t r = 0; r < rows; ++r) {
    int label = static_cast<int>(rng.uniform_below(num_classes));
    ds.y[r] = label;
    const double* mean = means.data() + static_cast<std::size_t>(label) * d;
    double* x = ds.X.data() + static_cast<std::size_t>(r) * d;
    for (int k = 0; k < d; ++k) x[k] = mean[k] + rng.normal();
  }
  return ds;
}

}  // namespace

std::vector<NodeDataset> generate_synthetic(int num_classes, int d, std::int64_t per_node,
                                            int n, std::uint64_t seed) {
  if (num_classes < 2 || d < 1) throw std::invalid_argument("generate_synthetic: K >= 2, d >= 1");
  if (per_node < 1 || n < 1) throw std::invalid_argument("generate_synthetic: sizes must be >= 1");
  auto means = draw_class_means(num_classes, d, seed);
  std::vector<NodeDataset> nodes;
  nodes.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(seed, {0x6e6f6465ull, static_cast<std::uint64_t>(i)});  // per-node stream
    nodes.push_back(draw_blob_samples(means, num_classes, d, per_node, rng));
  }
  return nodes;
}

Dataset generate_synthetic_holdout(int num_classes, int d, std::int64_t rows,
                                   std::uint64_t seed) {
  auto means = draw_class_means(num_classes, d, seed);
  Rng rng(seed, {0x686f6c646f7574ull});
  return draw_blob_samples(means, num_classes, d, rows, rng);
}

namespace {

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(path + ": truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open " + images_path);
  std::uint32_t magic = read_be_u32(img, images_path);
  if (magic != 0x00000803)
    throw std::runtime_error(images_path + ": bad images magic, expected 0x00000803");
  std::uint32_t count = read_be_u32(img, images_path);
  std::uint32_t rows = read_be_u32(img, images_path);
  std::uint32_t cols = read_be_u32(img, images_path);
  std::size_t want = static_cast<std::size_t>(count) * rows * cols;
  std::vector<unsigned char> pixels(want);
  if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(want))) {
    std::size_t got = static_cast<std::size_t>(img.gcount());
    throw std::runtime_error(images_path + ": truncated, expected " + std::to_string(want) +
                             " pixel bytes, got " + std::to_string(got));
  }

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open " + labels_path);
  std::uint32_t lmagic = read_be_u32(lab, labels_path);
  if (lmagic != 0x00000801)
    throw std::runtime_error(labels_path + ": bad labels magic, expected 0x00000801");
  std::uint32_t lcount = read_be_u32(lab, labels_path);
  if (lcount != count)
    throw std::runtime_error("label count " + std::to_string(lcount) +
                             " does not match image count " + std::to_string(count));
  std::vector<unsigned char> labels(lcount);
  if (!lab.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(lcount))) {
    std::size_t got = static_cast<std::size_t>(lab.gcount());
    throw std::runtime_error(labels_path + ": truncated, expected " + std::to_string(lcount) +
                             " label bytes, got " + std::to_string(got));
  }

  Dataset ds;
  ds.d = static_cast<int>(rows * cols);
  ds.num_classes = 10;
  ds.rows = count;
  ds.X.resize(want);
  for (std::size_t i = 0; i < want; ++i) ds.X[i] = pixels[i] / 255.0;
  ds.y.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (labels[i] > 9)
      throw std::runtime_error(labels_path + ": label out of range at row " + std::to_string(i));
    ds.y[i] = labels[i];
  }
  return ds;
}

std::vector<NodeDataset> shard_dataset(const Dataset& full, int n) {
  if (n < 1 || full.rows < n) throw std::invalid_argument("shard_dataset: need rows >= n >= 1");
  std::vector<NodeDataset> shards(n);
  std::int64_t base = full.rows / n;
  std::int64_t start = 0;
  for (int i = 0; i < n; ++i) {
    std::int64_t len = (i == n - 1) ? full.rows - start : base;
    NodeDataset& s = shards[i];
    s.d = full.d;
    s.num_classes = full.num_classes;
    s.rows = len;
    s.X.assign(full.X.begin() + start * full.d, full.X.begin() + (start + len) * full.d);
    s.y.assign(full.y.begin() + start, full.y.begin() + start + len);
    start += len;
  }
  return shards;
}

}  // namespace mandera
