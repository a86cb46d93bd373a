#pragma once

#include <array>
#include <string>
#include <vector>

#include "mandera/matrix.hpp"
#include "mandera/rank.hpp"

namespace mandera {

struct KMeansResult {
  std::vector<int> assignment;            // 0/1 per point
  std::array<std::array<double, 2>, 2> centroids{};
  int iterations = 0;
  bool degenerate = false;                // all points coincide
};

/// Lloyd's algorithm with K=2 on 2-D points, squared-Euclidean objective.
/// Deterministic: centroids start at the two points with maximal pairwise
/// distance (ties to the lowest index pair), assignment ties go to cluster 0,
/// an emptied cluster is repaired by moving the point farthest from its
/// centroid. Stops when assignments are stable or after 100 iterations.
KMeansResult kmeans2(std::span<const std::array<double, 2>> points);

enum class MaliciousRule { DuplicateRows, SmallerCluster, TieLowIndex, Degenerate };

const char* malicious_rule_name(MaliciousRule r);

struct DetectionResult {
  std::vector<int> labels;  // 1 = malicious, 0 = benign, per node
  std::array<std::array<double, 2>, 2> centroids{};  // (e, s) per cluster
  MaliciousRule rule = MaliciousRule::SmallerCluster;
  bool ambiguous = false;
  int iterations = 0;

  std::vector<int> malicious_set() const;
  std::string to_json() const;
};

/// Picks the malicious cluster from a 2-means assignment over (e_i, s_i):
/// (1) a cluster holding bitwise-identical message rows (the exact-gradient
/// signature; more duplicated rows wins if both have some), else (2) the
/// smaller cluster, else (3) the cluster with the smaller s_i spread; a final
/// tie falls to cluster 0 and is flagged ambiguous. The malicious set never
/// exceeds floor(n/2); duplicate evidence pointing at a majority cluster
/// falls through to (2) with the ambiguous flag raised.
DetectionResult select_malicious(const KMeansResult& km, const MessageMatrix& m,
                                 const NodeMoments& moments);

/// Algorithm: rank transform -> row moments -> 2-means on (e_i, s_i) ->
/// malicious-cluster selection. Needs no knowledge of the malicious count.
/// Pure and deterministic. Requires n >= 4.
DetectionResult detect(const MessageMatrix& m, int threads = 1);

}  // namespace mandera
