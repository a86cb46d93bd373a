#pragma once

#include <string>
#include <vector>

#include "mandera/aggregate.hpp"
#include "mandera/matrix.hpp"

namespace mandera {

struct BenchRow {
  std::string rule;
  int repeats = 0;
  double mean_ms = 0;
  double sd_ms = 0;
};

struct BenchTable {
  int n = 0;
  std::int64_t p = 0;
  int n0 = 0;
  int threads = 1;
  std::vector<BenchRow> rows;

  std::string to_csv() const;
};

/// Wall-clock timing of defense functions on one fixed matrix, one warmup
/// then `repeats` timed runs each. Detection-type defenses (mandera, krum,
/// bulyan) are timed without the final aggregation step; trimmed_mean,
/// median and mean are pure aggregation and timed whole. Rules are names
/// from: mandera, krum, bulyan, trimmed_mean, median, mean.
BenchTable bench_defenses(const MessageMatrix& m, const std::vector<std::string>& rules,
                          int repeats, int assumed_f, int threads = 1);

}  // namespace mandera
