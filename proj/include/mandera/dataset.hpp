#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mandera {

/// Dense labeled classification data: rows samples, d features, K classes.
struct Dataset {
  int d = 0;
  int num_classes = 0;
  std::int64_t rows = 0;
  std::vector<double> X;  // row-major, rows*d
  std::vector<int> y;     // size rows, values in [0, num_classes)

  std::span<const double> sample(std::int64_t i) const {
    return {X.data() + i * d, static_cast<std::size_t>(d)};
  }
};

/// Per-node shard. Nodes own their data for the whole run.
using NodeDataset = Dataset;

/// Gaussian class blobs: class means drawn once as 3*N(0, I_d), unit
/// covariance around them, labels uniform. Each node gets per_node fresh IID
/// samples; everything is a pure function of the seed.
std::vector<NodeDataset> generate_synthetic(int num_classes, int d, std::int64_t per_node,
                                            int n, std::uint64_t seed);

/// Holdout set drawn from the same blob distribution (own stream of `seed`).
Dataset generate_synthetic_holdout(int num_classes, int d, std::int64_t rows,
                                   std::uint64_t seed);

/// IDX file pair (images magic 0x00000803, labels 0x00000801, big-endian
/// dims, unsigned bytes). Features are scaled to [0,1]. Throws on bad magic,
/// truncation (message names expected vs actual byte counts) or count
/// mismatch between the two files.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Splits `full` into n equal disjoint shards (row order preserved; the last
/// shard absorbs the remainder).
std::vector<NodeDataset> shard_dataset(const Dataset& full, int n);

}  // namespace mandera
