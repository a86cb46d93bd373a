#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mandera/matrix.hpp"

namespace mandera {

// Rank direction is fixed: rank 1 = largest value, descending from there.
// Ties (bitwise-equal doubles) receive the arithmetic mean of the ranks they
// span, so every column of a rank matrix sums to n(n+1)/2 exactly.

/// Ranks of one column, in input order. Throws std::invalid_argument naming
/// the offending index if an entry is non-finite.
std::vector<double> rank_column(std::span<const double> column);

/// Internal entry point used by the streaming paths: no validation, writes
/// ranks of col[0..n) into out[0..n). Dispatches to the branchless counting
/// kernel for small n when the build supports it, else to the sort path.
void rank_column_into(const double* col, int n, double* out);

/// Sort-based reference implementation (always available, any n).
void rank_column_sorting(const double* col, int n, double* out);

/// True when the AVX-512 counting kernel is compiled in and used for small n.
bool rank_kernel_is_vectorized();

struct RankMatrix {
  int n = 0;
  std::int64_t p = 0;
  std::vector<double> ranks;  // row-major, n*p

  double at(int i, std::int64_t j) const { return ranks[static_cast<std::size_t>(i) * p + j]; }
};

/// Column-wise rank transform of the full matrix. Materializes n*p ranks;
/// use node_moments for the streaming statistics instead.
RankMatrix rank_matrix(const MessageMatrix& m, int threads = 1);

/// Per-node moments of the rank matrix rows: e (mean), v (population
/// variance, divisor p) and s = sqrt(v).
struct NodeMoments {
  std::vector<double> e;
  std::vector<double> v;
  std::vector<double> s;
};

/// Streams over columns accumulating per-row rank sums, so memory stays O(n)
/// beyond the input. Results are bit-identical for any thread count: columns
/// are accumulated in fixed blocks that are always reduced in block order.
NodeMoments node_moments(const MessageMatrix& m, int threads = 1);

}  // namespace mandera
