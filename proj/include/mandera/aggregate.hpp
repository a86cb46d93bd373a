#pragma once

#include <span>
#include <string>
#include <vector>

#include "mandera/matrix.hpp"

namespace mandera {

enum class AggregationKind { Mean, Krum, Bulyan, TrimmedMean, Median, ManderaThenMean };

const char* aggregation_kind_name(AggregationKind k);
AggregationKind aggregation_kind_from_name(const std::string& name);

struct AggregationRule {
  AggregationKind kind = AggregationKind::Mean;
  int assumed_f = 0;   // Krum / Bulyan
  int trim_beta = 0;   // TrimmedMean

  void validate(int n) const;
};

/// Per-column mean over the included rows. Throws if include is empty.
std::vector<double> aggregate_mean(const MessageMatrix& m, std::span<const int> include);

/// Single Krum: score_i = sum of squared Euclidean distances from row i to
/// its n-f-2 nearest other rows; returns the argmin, ties to the lowest
/// index. Requires n >= assumed_f + 3.
int krum_select(const MessageMatrix& m, int assumed_f, int threads = 1);

/// Krum restricted to a row subset (used by Bulyan's shrinking pool). The
/// neighbour count is clamped to at least 1 when the pool runs small.
/// Returns an index into `pool`.
int krum_select_pool(const MessageMatrix& m, std::span<const int> pool, int assumed_f,
                     int threads = 1);

/// Per-column: drop the trim_beta largest and smallest values, average the
/// rest. Requires 2*trim_beta < n.
std::vector<double> trimmed_mean(const MessageMatrix& m, int trim_beta);

/// Per-column median; even n averages the two middle order statistics.
std::vector<double> coordinate_median(const MessageMatrix& m);

/// Bulyan's selection stage: runs Krum iteratively, moving the winner out of
/// the pool, until n - 2*assumed_f rows are selected. Requires n >= 4f + 3.
std::vector<int> bulyan_selection(const MessageMatrix& m, int assumed_f, int threads = 1);

/// Full Bulyan: per coordinate, average the |S| - 2f selected values closest
/// to the selection's coordinate median.
std::vector<double> bulyan(const MessageMatrix& m, int assumed_f, int threads = 1);

}  // namespace mandera
