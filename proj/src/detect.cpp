#include "mandera/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mandera/report.hpp"

namespace mandera {

namespace {

double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

}  // namespace

KMeansResult kmeans2(std::span<const std::array<double, 2>> points) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw std::invalid_argument("kmeans2: need at least 2 points");

  KMeansResult res;
  res.assignment.assign(n, 0);

  // farthest-pair seeding, ties to the lowest (i, j)
  double best = -1.0;
  int bi = 0, bj = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d = dist2(points[i], points[j]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  if (best == 0.0) {
    res.degenerate = true;
    res.centroids[0] = points[0];
    res.centroids[1] = points[0];
    return res;
  }
  res.centroids[0] = points[bi];
  res.centroids[1] = points[bj];

  for (int iter = 1; iter <= 100; ++iter) {
    bool changed = false;
    int count[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      double d0 = dist2(points[i], res.centroids[0]);
      double d1 = dist2(points[i], res.centroids[1]);
      int a = d1 < d0 ? 1 : 0;  // tie goes to cluster 0
      if (a != res.assignment[i]) changed = true;
      res.assignment[i] = a;
      ++count[a];
    }
    for (int c = 0; c < 2; ++c) {
      if (count[c] > 0) continue;
      // repair: move the point farthest from its centroid into the empty side
      double far = -1.0;
      int pick = 0;
      for (int i = 0; i < n; ++i) {
        double d = dist2(points[i], res.centroids[res.assignment[i]]);
        if (d > far) {
          far = d;
          pick = i;
        }
      }
      --count[res.assignment[pick]];
      res.assignment[pick] = c;
      ++count[c];
      changed = true;
    }
    double sum[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < n; ++i) {
      sum[res.assignment[i]][0] += points[i][0];
      sum[res.assignment[i]][1] += points[i][1];
    }
    for (int c = 0; c < 2; ++c) {
      res.centroids[c][0] = sum[c][0] / count[c];
      res.centroids[c][1] = sum[c][1] / count[c];
    }
    if (changed) res.iterations = iter;
    if (!changed) break;
  }
  return res;
}

const char* malicious_rule_name(MaliciousRule r) {
  switch (r) {
    case MaliciousRule::DuplicateRows: return "duplicate_rows";
    case MaliciousRule::SmallerCluster: return "smaller_cluster";
    case MaliciousRule::TieLowIndex: return "tie_low_index";
    case MaliciousRule::Degenerate: return "degenerate";
  }
  return "?";
}

namespace {

// Rows with at least one bitwise-identical twin inside the same cluster.
// Moments are grouped first; only groups with coinciding (e, s) pay for the
// byte comparison.
std::array<int, 2> duplicate_row_counts(const KMeansResult& km, const MessageMatrix& m,
                                        const NodeMoments& mo) {
  std::array<int, 2> dup = {0, 0};
  std::map<std::pair<double, double>, std::vector<int>> groups;
  for (int i = 0; i < m.n; ++i) groups[{mo.e[i], mo.s[i]}].push_back(i);
  const std::size_t row_bytes = static_cast<std::size_t>(m.p) * sizeof(double);
  for (auto& [key, rows] : groups) {
    if (rows.size() < 2) continue;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = 0; b < rows.size(); ++b) {
        if (a == b) continue;
        if (km.assignment[rows[a]] != km.assignment[rows[b]]) continue;
        const double* ra = m.values.data() + static_cast<std::size_t>(rows[a]) * m.p;
        const double* rb = m.values.data() + static_cast<std::size_t>(rows[b]) * m.p;
        if (std::memcmp(ra, rb, row_bytes) == 0) {
          ++dup[km.assignment[rows[a]]];
          break;
        }
      }
    }
  }
  return dup;
}

// Scale-free separation check along the centroid axis; a 2-means split of a
// single noise blob lands near 2.6, genuinely attacked inputs far above.
bool separation_is_weak(const KMeansResult& km,
                        std::span<const std::array<double, 2>> pts) {
  double axis[2] = {km.centroids[1][0] - km.centroids[0][0],
                    km.centroids[1][1] - km.centroids[0][1]};
  double sep = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1]);
  if (sep == 0.0) return true;
  axis[0] /= sep;
  axis[1] /= sep;
  double ss = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int c = km.assignment[i];
    double t = (pts[i][0] - km.centroids[c][0]) * axis[0] +
               (pts[i][1] - km.centroids[c][1]) * axis[1];
    ss += t * t;
  }
  double within_sd = std::sqrt(ss / static_cast<double>(pts.size()));
  return sep < 3.5 * within_sd;
}

}  // namespace

DetectionResult select_malicious(const KMeansResult& km, const MessageMatrix& m,
                                 const NodeMoments& moments) {
  const int n = m.n;
  DetectionResult res;
  res.centroids = km.centroids;
  res.iterations = km.iterations;
  res.labels.assign(n, 0);

  if (km.degenerate) {
    res.rule = MaliciousRule::Degenerate;
    res.ambiguous = true;
    return res;
  }

  int size[2] = {0, 0};
  for (int a : km.assignment) ++size[a];
  if (size[0] == 0 || size[1] == 0)
    throw std::invalid_argument("select_malicious: needs two nonempty clusters");

  std::vector<std::array<double, 2>> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = {moments.e[i], moments.s[i]};

  auto dup = duplicate_row_counts(km, m, moments);
  int chosen = -1;
  if (dup[0] != dup[1]) {
    int cand = dup[0] > dup[1] ? 0 : 1;
    if (size[cand] <= n / 2) {
      res.rule = MaliciousRule::DuplicateRows;
      chosen = cand;
    } else {
      // duplicate evidence points at a majority; fall back and flag
      res.ambiguous = true;
    }
  }
  if (chosen < 0) {
    if (size[0] != size[1]) {
      res.rule = MaliciousRule::SmallerCluster;
      chosen = size[0] < size[1] ? 0 : 1;
    } else {
      // equal sizes: the cluster whose rank-SD spread is tighter
      double spread[2];
      for (int c = 0; c < 2; ++c) {
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (int i = 0; i < n; ++i) {
          if (km.assignment[i] != c) continue;
          lo = std::min(lo, moments.s[i]);
          hi = std::max(hi, moments.s[i]);
        }
        spread[c] = hi - lo;
      }
      if (spread[0] != spread[1]) {
        res.rule = MaliciousRule::TieLowIndex;  // extension rule, flagged below
        chosen = spread[0] < spread[1] ? 0 : 1;
        res.ambiguous = true;
      } else {
        res.rule = MaliciousRule::TieLowIndex;
        chosen = 0;
        res.ambiguous = true;
      }
    }
  }

  if (res.rule != MaliciousRule::DuplicateRows && separation_is_weak(km, pts))
    res.ambiguous = true;

  for (int i = 0; i < n; ++i) res.labels[i] = km.assignment[i] == chosen ? 1 : 0;
  return res;
}

DetectionResult detect(const MessageMatrix& m, int threads) {
  if (m.n < 4) throw std::invalid_argument("mandera: need n >= 4 nodes");
  NodeMoments mo = node_moments(m, threads);
  std::vector<std::array<double, 2>> pts(m.n);
  for (int i = 0; i < m.n; ++i) pts[i] = {mo.e[i], mo.s[i]};
  KMeansResult km = kmeans2(pts);
  return select_malicious(km, m, mo);
}

std::vector<int> DetectionResult::malicious_set() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    if (labels[i]) out.push_back(i);
  return out;
}

std::string DetectionResult::to_json() const {
  std::ostringstream os;
  os << "{\"labels\":[";
  for (std::size_t i = 0; i < labels.size(); ++i) os << (i ? "," : "") << labels[i];
  os << "],\"centroids\":[[" << format_double(centroids[0][0]) << ","
     << format_double(centroids[0][1]) << "],[" << format_double(centroids[1][0]) << ","
     << format_double(centroids[1][1]) << "]],\"rule\":\"" << malicious_rule_name(rule)
     << "\",\"ambiguous\":" << (ambiguous ? "true" : "false")
     << ",\"iterations\":" << iterations << "}";
  return os.str();
}

}  // namespace mandera
