#include "mandera/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mandera/parallel.hpp"

namespace mandera {

const char* aggregation_kind_name(AggregationKind k) {
  switch (k) {
    case AggregationKind::Mean: return "mean";
    case AggregationKind::Krum: return "krum";
    case AggregationKind::Bulyan: return "bulyan";
    case AggregationKind::TrimmedMean: return "trimmed_mean";
    case AggregationKind::Median: return "median";
    case AggregationKind::ManderaThenMean: return "mandera_then_mean";
  }
  return "?";
}

AggregationKind aggregation_kind_from_name(const std::string& name) {
  if (name == "mean") return AggregationKind::Mean;
  if (name == "krum") return AggregationKind::Krum;
  if (name == "bulyan") return AggregationKind::Bulyan;
  if (name == "trimmed_mean") return AggregationKind::TrimmedMean;
  if (name == "median") return AggregationKind::Median;
  if (name == "mandera_then_mean") return AggregationKind::ManderaThenMean;
  throw std::invalid_argument("unknown aggregation rule: " + name);
}

void AggregationRule::validate(int n) const {
  switch (kind) {
    case AggregationKind::Krum:
      if (n < assumed_f + 3)
        throw std::invalid_argument("krum needs n >= assumed_f + 3 (n=" + std::to_string(n) +
                                    ", f=" + std::to_string(assumed_f) + ")");
      break;
    case AggregationKind::Bulyan:
      if (n < 4 * assumed_f + 3)
        throw std::invalid_argument("bulyan needs n >= 4*assumed_f + 3 (n=" +
                                    std::to_string(n) + ", f=" + std::to_string(assumed_f) + ")");
      break;
    case AggregationKind::TrimmedMean:
      if (2 * trim_beta >= n)
        throw std::invalid_argument("trimmed_mean needs 2*trim_beta < n (n=" +
                                    std::to_string(n) + ", beta=" + std::to_string(trim_beta) + ")");
      break;
    default:
      break;
  }
  if (assumed_f < 0 || trim_beta < 0)
    throw std::invalid_argument("aggregation parameters must be non-negative");
}

std::vector<double> aggregate_mean(const MessageMatrix& m, std::span<const int> include) {
  if (include.empty()) throw std::invalid_argument("aggregate_mean: empty include set");
  std::vector<double> mean(m.p, 0.0);
  for (int i : include) {
    const double* row = m.values.data() + static_cast<std::size_t>(i) * m.p;
    for (std::int64_t j = 0; j < m.p; ++j) mean[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(include.size());
  for (double& v : mean) v *= inv;
  return mean;
}

namespace {

// Squared distances for every pool pair, accumulated over column chunks of
// the full-width rows. The chunked layout keeps all rows' active segments
// cache-resident; per-pair accumulation runs over chunks in ascending order,
// so values do not depend on the thread split.
constexpr std::int64_t kDistChunk = 1024;

std::vector<double> pairwise_sq_distances(const MessageMatrix& m, std::span<const int> pool,
                                          int threads) {
  const int pn = static_cast<int>(pool.size());
  const std::int64_t p = m.p;
  const std::size_t npairs = static_cast<std::size_t>(pn) * (pn - 1) / 2;
  std::vector<double> dist(npairs, 0.0);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(npairs);
  for (int a = 0; a < pn; ++a)
    for (int b = a + 1; b < pn; ++b) pairs.emplace_back(pool[a], pool[b]);

  parallel_for(npairs, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::int64_t c0 = 0; c0 < p; c0 += kDistChunk) {
      const std::int64_t c1 = std::min(p, c0 + kDistChunk);
      const std::int64_t len = c1 - c0;
      for (std::size_t pr = lo; pr < hi; ++pr) {
        const double* a = m.values.data() + static_cast<std::size_t>(pairs[pr].first) * p + c0;
        const double* b = m.values.data() + static_cast<std::size_t>(pairs[pr].second) * p + c0;
        double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        std::int64_t j = 0;
        for (; j + 4 <= len; j += 4) {
          double d0 = a[j] - b[j], d1 = a[j + 1] - b[j + 1];
          double d2 = a[j + 2] - b[j + 2], d3 = a[j + 3] - b[j + 3];
          s0 += d0 * d0;
          s1 += d1 * d1;
          s2 += d2 * d2;
          s3 += d3 * d3;
        }
        double s = (s0 + s1) + (s2 + s3);
        for (; j < len; ++j) {
          double d = a[j] - b[j];
          s += d * d;
        }
        dist[pr] += s;
      }
    }
  });
  return dist;
}

int krum_argmin(const std::vector<double>& dist, int pn, int neighbours) {
  double best_score = HUGE_VAL;
  int best = 0;
  std::vector<double> others(pn - 1);
  for (int a = 0; a < pn; ++a) {
    int cnt = 0;
    for (int b = 0; b < pn; ++b) {
      if (b == a) continue;
      int lo = std::min(a, b), hi = std::max(a, b);
      std::size_t idx = static_cast<std::size_t>(lo) * (2 * pn - lo - 1) / 2 + (hi - lo - 1);
      others[cnt++] = dist[idx];
    }
    std::nth_element(others.begin(), others.begin() + neighbours, others.end());
    double score = 0;
    for (int k = 0; k < neighbours; ++k) score += others[k];
    if (score < best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

}  // namespace

int krum_select_pool(const MessageMatrix& m, std::span<const int> pool, int assumed_f,
                     int threads) {
  const int pn = static_cast<int>(pool.size());
  if (pn < 2) throw std::invalid_argument("krum: pool too small");
  // clamp keeps the last rounds of a shrinking pool well-defined
  const int neighbours = std::max(1, pn - assumed_f - 2);
  auto dist = pairwise_sq_distances(m, pool, threads);
  return krum_argmin(dist, pn, neighbours);
}

int krum_select(const MessageMatrix& m, int assumed_f, int threads) {
  if (m.n < assumed_f + 3)
    throw std::invalid_argument("krum needs n >= assumed_f + 3 (n=" + std::to_string(m.n) +
                                ", f=" + std::to_string(assumed_f) + ")");
  std::vector<int> pool(m.n);
  std::iota(pool.begin(), pool.end(), 0);
  return krum_select_pool(m, pool, assumed_f, threads);
}

std::vector<double> trimmed_mean(const MessageMatrix& m, int trim_beta) {
  if (2 * trim_beta >= m.n)
    throw std::invalid_argument("trimmed_mean needs 2*trim_beta < n");
  const int n = m.n;
  std::vector<double> out(m.p);
  std::vector<double> col(n);
  for (std::int64_t j = 0; j < m.p; ++j) {
    for (int i = 0; i < n; ++i) col[i] = m.values[static_cast<std::size_t>(i) * m.p + j];
    std::sort(col.begin(), col.end());
    double s = 0;
    for (int i = trim_beta; i < n - trim_beta; ++i) s += col[i];
    out[j] = s / static_cast<double>(n - 2 * trim_beta);
  }
  return out;
}

std::vector<double> coordinate_median(const MessageMatrix& m) {
  const int n = m.n;
  std::vector<double> out(m.p);
  std::vector<double> col(n);
  for (std::int64_t j = 0; j < m.p; ++j) {
    for (int i = 0; i < n; ++i) col[i] = m.values[static_cast<std::size_t>(i) * m.p + j];
    auto mid = col.begin() + n / 2;
    std::nth_element(col.begin(), mid, col.end());
    if (n % 2 == 1) {
      out[j] = *mid;
    } else {
      double upper = *mid;
      double lower = *std::max_element(col.begin(), mid);
      out[j] = 0.5 * (lower + upper);
    }
  }
  return out;
}

std::vector<int> bulyan_selection(const MessageMatrix& m, int assumed_f, int threads) {
  if (m.n < 4 * assumed_f + 3)
    throw std::invalid_argument("bulyan needs n >= 4*assumed_f + 3 (n=" + std::to_string(m.n) +
                                ", f=" + std::to_string(assumed_f) + ")");
  const int target = m.n - 2 * assumed_f;
  std::vector<int> pool(m.n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> selected;
  selected.reserve(target);
  while (static_cast<int>(selected.size()) < target) {
    int win = pool.size() == 1 ? 0 : krum_select_pool(m, pool, assumed_f, threads);
    selected.push_back(pool[win]);
    pool.erase(pool.begin() + win);
  }
  return selected;
}

std::vector<double> bulyan(const MessageMatrix& m, int assumed_f, int threads) {
  std::vector<int> sel = bulyan_selection(m, assumed_f, threads);
  const int sn = static_cast<int>(sel.size());
  const int keep = sn - 2 * assumed_f;
  std::vector<double> out(m.p);
  std::vector<double> col(sn), sorted(sn);
  for (std::int64_t j = 0; j < m.p; ++j) {
    for (int i = 0; i < sn; ++i)
      col[i] = m.values[static_cast<std::size_t>(sel[i]) * m.p + j];
    sorted = col;
    std::sort(sorted.begin(), sorted.end());
    double median = (sn % 2 == 1) ? sorted[sn / 2]
                                  : 0.5 * (sorted[sn / 2 - 1] + sorted[sn / 2]);
    // keep values closest to the median; ties by value then input order
    std::vector<int> idx(sn);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      double da = std::fabs(col[a] - median), db = std::fabs(col[b] - median);
      if (da != db) return da < db;
      return col[a] < col[b];
    });
    double s = 0;
    for (int k = 0; k < keep; ++k) s += col[idx[k]];
    out[j] = s / static_cast<double>(keep);
  }
  return out;
}

}  // namespace mandera
