#include "mandera/rank.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mandera/parallel.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace mandera {

namespace {

// Counting kernels stay O(n^2) per column, so cap them at small n where the
// branchless form beats sorting.
constexpr int kCountingMaxN = 256;

// Column blocks are the unit of both threading and moment accumulation;
// partial sums are always reduced in block order, so results do not depend
// on the thread count.
constexpr std::int64_t kColumnBlock = 4096;

[[noreturn]] void throw_non_finite(const double* col, int n) {
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(col[i]))
      throw std::invalid_argument("rank_column: non-finite entry at index " + std::to_string(i));
  throw std::invalid_argument("rank_column: non-finite entry");
}

void check_finite(const double* col, int n) {
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(col[i])) throw_non_finite(col, n);
}

}  // namespace

void rank_column_sorting(const double* col, int n, double* out) {
  check_finite(col, n);
  struct Entry {
    double value;
    int index;
  };
  std::vector<Entry> order(n);
  for (int i = 0; i < n; ++i) order[i] = {col[i], i};
  std::sort(order.begin(), order.end(),
            [](const Entry& a, const Entry& b) { return a.value > b.value; });
  int i = 0;
  while (i < n) {
    int k = i;
    while (k + 1 < n && order[k + 1].value == order[i].value) ++k;
    double rank = 0.5 * (i + k) + 1.0;  // mean of positions i..k, 1-based
    for (int q = i; q <= k; ++q) out[order[q].index] = rank;
    i = k + 1;
  }
}

#if defined(__AVX512F__)

namespace {

// Branchless rank of col[i]: (#greater) + (#equal + 1)/2, comparisons exact.
// The greater-count pass alone settles a tie-free column, which the exact
// integer count-sum identity detects; tied columns take a second pass for
// equal-counts. The identities double as the non-finite guard: a NaN breaks
// the rank-sum identity (every comparison against it is false) and an
// infinity trips the explicit range check below.
void rank_column_counting(const double* col, int n, double* out) {
  alignas(64) double padded[kCountingMaxN + 8];
  const int nvec = (n + 7) / 8;
  std::memcpy(padded, col, static_cast<std::size_t>(n) * sizeof(double));
  for (int i = n; i < nvec * 8; ++i) padded[i] = -HUGE_VAL;  // pad never counts as greater

  alignas(64) std::int64_t greater[kCountingMaxN];
  std::int64_t gsum = 0;
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    __m512d x0 = _mm512_set1_pd(col[i]);
    __m512d x1 = _mm512_set1_pd(col[i + 1]);
    int g0 = 0, g1 = 0;
    for (int b = 0; b < nvec; ++b) {
      __m512d v = _mm512_load_pd(padded + 8 * b);
      g0 += _mm_popcnt_u32(_mm512_cmp_pd_mask(v, x0, _CMP_GT_OQ));
      g1 += _mm_popcnt_u32(_mm512_cmp_pd_mask(v, x1, _CMP_GT_OQ));
    }
    greater[i] = g0;
    greater[i + 1] = g1;
    gsum += g0 + g1;
  }
  for (; i < n; ++i) {
    __m512d x = _mm512_set1_pd(col[i]);
    int g = 0;
    for (int b = 0; b < nvec; ++b) {
      __m512d v = _mm512_load_pd(padded + 8 * b);
      g += _mm_popcnt_u32(_mm512_cmp_pd_mask(v, x, _CMP_GT_OQ));
    }
    greater[i] = g;
    gsum += g;
  }

  const std::int64_t tie_free_sum = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (gsum == tie_free_sum) {
    // distinct values (a NaN breaks this identity and takes the tie path);
    // an infinity can only sit at an extreme rank, so only those need the
    // finite check
    for (int q = 0; q < n; ++q) out[q] = static_cast<double>(greater[q] + 1);
    for (int q = 0; q < n; ++q)
      if ((greater[q] == 0 || greater[q] == n - 1) && !std::isfinite(col[q]))
        throw_non_finite(col, n);
    return;
  }

  // tie path: equal-counts; the rank-sum identity is the NaN guard, and an
  // infinity must belong to the top block (#greater = 0) or the bottom
  // block (#greater + #equal = n)
  alignas(64) std::int64_t equal[kCountingMaxN];
  double rank_sum = 0;
  for (int q = 0; q < n; ++q) {
    __m512d x = _mm512_set1_pd(col[q]);
    int e = 0;
    for (int b = 0; b < nvec; ++b) {
      __m512d v = _mm512_load_pd(padded + 8 * b);
      e += _mm_popcnt_u32(_mm512_cmp_pd_mask(v, x, _CMP_EQ_OQ));
    }
    equal[q] = e;
    out[q] = static_cast<double>(greater[q]) + 0.5 * static_cast<double>(e + 1);
    rank_sum += out[q];
  }
  if (rank_sum != 0.5 * static_cast<double>(n) * (n + 1)) throw_non_finite(col, n);
  for (int q = 0; q < n; ++q)
    if ((greater[q] == 0 || greater[q] + equal[q] == n) && !std::isfinite(col[q]))
      throw_non_finite(col, n);
}

}  // namespace

bool rank_kernel_is_vectorized() { return true; }

void rank_column_into(const double* col, int n, double* out) {
  if (n <= kCountingMaxN)
    rank_column_counting(col, n, out);
  else
    rank_column_sorting(col, n, out);
}

#else

bool rank_kernel_is_vectorized() { return false; }

void rank_column_into(const double* col, int n, double* out) {
  rank_column_sorting(col, n, out);
}

#endif

std::vector<double> rank_column(std::span<const double> column) {
  if (column.empty()) throw std::invalid_argument("rank_column: empty column");
  std::vector<double> out(column.size());
  rank_column_into(column.data(), static_cast<int>(column.size()), out.data());
  return out;
}

namespace {

void check_shape(const MessageMatrix& m) {
  if (m.n < 2 || m.p < 1)
    throw std::invalid_argument("matrix needs n >= 2 and p >= 1, got n=" + std::to_string(m.n) +
                                " p=" + std::to_string(m.p));
  if (m.values.size() != static_cast<std::size_t>(m.n) * m.p)
    throw std::invalid_argument("matrix value count does not match n*p");
}

}  // namespace

RankMatrix rank_matrix(const MessageMatrix& m, int threads) {
  check_shape(m);
  RankMatrix r;
  r.n = m.n;
  r.p = m.p;
  r.ranks.resize(m.values.size());
  const int n = m.n;
  const std::int64_t p = m.p;
  parallel_for(static_cast<std::size_t>(p), threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> col(n), rk(n);
    for (std::size_t j = lo; j < hi; ++j) {
      for (int i = 0; i < n; ++i) col[i] = m.values[static_cast<std::size_t>(i) * p + j];
      try {
        rank_column_into(col.data(), n, rk.data());
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(e.what()) + " (column " + std::to_string(j) + ")");
      }
      for (int i = 0; i < n; ++i) r.ranks[static_cast<std::size_t>(i) * p + j] = rk[i];
    }
  });
  return r;
}

NodeMoments node_moments(const MessageMatrix& m, int threads) {
  check_shape(m);
  const int n = m.n;
  const std::int64_t p = m.p;
  const std::size_t nblocks = static_cast<std::size_t>((p + kColumnBlock - 1) / kColumnBlock);

  // per-block partial sums, reduced in block order afterwards
  std::vector<double> block_sum(nblocks * n, 0.0);
  std::vector<double> block_sumsq(nblocks * n, 0.0);

  parallel_for(nblocks, threads, [&](std::size_t blo, std::size_t bhi) {
    std::vector<double> col(n), rk(n);
    for (std::size_t b = blo; b < bhi; ++b) {
      std::int64_t j0 = static_cast<std::int64_t>(b) * kColumnBlock;
      std::int64_t j1 = std::min<std::int64_t>(p, j0 + kColumnBlock);
      double* bs = block_sum.data() + b * n;
      double* bq = block_sumsq.data() + b * n;
      for (std::int64_t j = j0; j < j1; ++j) {
        for (int i = 0; i < n; ++i) col[i] = m.values[static_cast<std::size_t>(i) * p + j];
        try {
          rank_column_into(col.data(), n, rk.data());
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument(std::string(e.what()) + " (column " + std::to_string(j) +
                                      ")");
        }
        for (int i = 0; i < n; ++i) {
          bs[i] += rk[i];
          bq[i] += rk[i] * rk[i];
        }
      }
    }
  });

  std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const double* bs = block_sum.data() + b * n;
    const double* bq = block_sumsq.data() + b * n;
    for (int i = 0; i < n; ++i) {
      sum[i] += bs[i];
      sumsq[i] += bq[i];
    }
  }

  NodeMoments out;
  out.e.resize(n);
  out.v.resize(n);
  out.s.resize(n);
  const double pd = static_cast<double>(p);
  for (int i = 0; i < n; ++i) {
    double e = sum[i] / pd;
    double v = sumsq[i] / pd - e * e;
    if (v < 0.0) v = 0.0;  // guard the subtraction against rounding
    out.e[i] = e;
    out.v[i] = v;
    out.s[i] = std::sqrt(v);
  }
  return out;
}

}  // namespace mandera
