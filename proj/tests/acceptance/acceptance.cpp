// Acceptance suite: one criterion per function, each printing a PASS/FAIL
// line with the measured numbers. Run with a criterion number (1..9) or
// "all". Exit code 0 only if every requested criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mandera/aggregate.hpp"
#include "mandera/attack.hpp"
#include "mandera/bench.hpp"
#include "mandera/config.hpp"
#include "mandera/detect.hpp"
#include "mandera/experiment.hpp"
#include "mandera/federated.hpp"
#include "mandera/matrix.hpp"
#include "mandera/metrics.hpp"
#include "mandera/rank.hpp"
#include "mandera/rng.hpp"
#include "mandera/stats.hpp"
#include "mandera/theory.hpp"

using namespace mandera;
using clock_type = std::chrono::steady_clock;

namespace {

int g_threads = 2;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// C1: rank correctness property suite
// ---------------------------------------------------------------------------

std::vector<double> rank_oracle(const std::vector<double>& col) {
  const int n = static_cast<int>(col.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return col[a] > col[b]; });
  std::vector<double> out(n);
  int i = 0;
  while (i < n) {
    int k = i;
    while (k + 1 < n && col[idx[k + 1]] == col[idx[i]]) ++k;
    double r = (i + 1 + k + 1) / 2.0;
    for (int q = i; q <= k; ++q) out[idx[q]] = r;
    i = k + 1;
  }
  return out;
}

Check criterion1() {
  Check c;
  std::vector<double> example = {1.1, -2, 3.2};
  c.require(rank_column(example) == std::vector<double>{2, 3, 1},
            "worked example Rank(1.1,-2,3.2) != (2,3,1)");

  Rng rng(0xC1);
  int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    int n = 1 + static_cast<int>(rng.uniform_below(64));
    std::vector<double> col(n);
    // duplicate-heavy half: draw from a handful of distinct values
    if (t % 2 == 0) {
      int levels = 1 + static_cast<int>(rng.uniform_below(5));
      std::vector<double> pool(levels);
      for (auto& v : pool) v = rng.normal();
      for (auto& v : col) v = pool[rng.uniform_below(levels)];
    } else {
      for (auto& v : col) v = rng.normal();
    }
    auto r = rank_column(col);
    double sum = 0;
    for (double v : r) sum += v;
    if (sum != static_cast<double>(n) * (n + 1) / 2) {
      c.require(false, "column-sum identity failed at trial " + std::to_string(t));
      break;
    }
    if (r != rank_oracle(col)) {
      c.require(false, "tie oracle mismatch at trial " + std::to_string(t));
      break;
    }
    double scale = 0.25 + 4.0 * rng.uniform01();
    double shift = 8.0 * rng.uniform01() - 4.0;
    std::vector<double> mapped(n);
    for (int i = 0; i < n; ++i) mapped[i] = scale * col[i] + shift;
    if (rank_column(mapped) != r) {
      c.require(false, "scale invariance failed at trial " + std::to_string(t));
      break;
    }
  }
  c.note(std::to_string(trials) + " random vectors");
  return c;
}

// ---------------------------------------------------------------------------
// C2: Gaussian-attack limits
// ---------------------------------------------------------------------------

Check criterion2() {
  Check c;
  const int n = 100, n0 = 30, reps = 20;
  const std::int64_t p = 100000;
  GradientModelOptions opts;
  opts.sigma2 = 1.0;
  opts.sample_size = 100.0;  // sigma^2/N = 0.01
  auto model = make_gradient_model(n, n0, p, 0.5, 0xC2, opts);

  double worst_e = 0;
  std::vector<double> vb(reps), vm(reps);
  for (int r = 0; r < reps; ++r) {
    auto m = synth_benign(model, derive_seed(0xC2, {1, static_cast<std::uint64_t>(r)}));
    AttackSpec spec;
    spec.kind = AttackKind::Gaussian;
    spec.malicious = model.malicious;
    spec.gaussian_variance = 30.0;
    spec.seed = derive_seed(0xC2, {2, static_cast<std::uint64_t>(r)});
    m = apply_gaussian(m, spec);
    auto mo = node_moments(m, g_threads);
    for (int i = 0; i < n; ++i) worst_e = std::max(worst_e, std::fabs(mo.e[i] - 50.5));
    double b = 0, ml = 0;
    for (int i : model.benign_set()) b += mo.v[i];
    for (int i : model.malicious) ml += mo.v[i];
    vb[r] = b / (n - n0);
    vm[r] = ml / n0;
  }
  auto mb = mean_se(vb);
  auto mm = mean_se(vm);
  double gap = mm.mean - mb.mean;
  double se = std::hypot(mb.se, mm.se);
  c.require(worst_e < 1.0, "max |e_i - 50.5| = " + fmt(worst_e) + " >= 1.0");
  c.require(gap >= 5.0 * se, "variance gap only " + fmt(gap / std::max(se, 1e-300)) + " SEs");
  c.note("max|e-50.5|=" + fmt(worst_e) + ", v gap=" + fmt(gap) + " (" +
         fmt(gap / std::max(se, 1e-300), 3) + " SEs)");
  return c;
}

// ---------------------------------------------------------------------------
// C3: sign-flip / zero-gradient limits
// ---------------------------------------------------------------------------

Check criterion3() {
  Check c;
  const int n = 100, n0 = 30, n1 = 70, reps = 10;
  const std::int64_t p = 100000;
  const double rho = 0.7;
  auto model = make_gradient_model(n, n0, p, rho, 0xC3);
  auto lim = limits_signflip(n, n0, rho);

  std::vector<double> eb(reps), em(reps), vb(reps);
  for (int r = 0; r < reps; ++r) {
    auto honest = synth_benign(model, derive_seed(0xC3, {1, static_cast<std::uint64_t>(r)}));
    AttackSpec spec;
    spec.kind = AttackKind::SignFlip;
    spec.malicious = model.malicious;
    spec.ratio_r = 3.0;
    auto m = apply_sign_flip(honest, spec);
    auto mo = node_moments(m, g_threads);
    double b = 0, ml = 0, v = 0;
    for (int i : model.benign_set()) {
      b += mo.e[i];
      v += mo.v[i];
    }
    for (int i : model.malicious) ml += mo.e[i];
    eb[r] = b / n1;
    em[r] = ml / n0;
    vb[r] = v / n1;
  }
  auto meb = mean_se(eb);
  auto mem = mean_se(em);
  auto mvb = mean_se(vb);
  c.require(std::fabs(meb.mean - 44.5) < 0.5,
            "benign mean e = " + fmt(meb.mean) + " not within 0.5 of 44.5");
  c.require(std::fabs(mem.mean - 64.5) < 0.5,
            "malicious mean e = " + fmt(mem.mean) + " not within 0.5 of 64.5");
  // v subtracts the sample mean, which costs exactly (n1^2-1)/12/p; gate
  // against that expectation of the estimator, and sanity-bound the raw gap
  double expected_vb = lim.s2_b - (static_cast<double>(n1) * n1 - 1.0) / 12.0 / p;
  double dev = std::fabs(mvb.mean - expected_vb);
  c.require(dev <= 3.0 * std::max(mvb.se, 1e-300),
            "benign v " + fmt(mvb.mean, 8) + " deviates " + fmt(dev) + " > 3 SE (" +
                fmt(mvb.se) + ") from " + fmt(expected_vb, 8));
  c.require(std::fabs(mvb.mean - lim.s2_b) < 0.05,
            "benign v " + fmt(mvb.mean, 8) + " not near 597.25");

  // invariance in r over shared benign draws
  auto honest = synth_benign(model, derive_seed(0xC3, {7}));
  NodeMoments base;
  bool first = true;
  for (double r : {0.5, 3.0, 7.0 / 3.0}) {
    AttackSpec spec;
    spec.kind = AttackKind::SignFlip;
    spec.malicious = model.malicious;
    spec.ratio_r = r;
    auto mo = node_moments(apply_sign_flip(honest, spec), g_threads);
    if (first) {
      base = mo;
      first = false;
    } else if (mo.e != base.e || mo.v != base.v) {
      c.require(false, "moments changed with r = " + fmt(r));
    }
  }
  c.note("benign e=" + fmt(meb.mean, 6) + ", malicious e=" + fmt(mem.mean, 6) +
         ", benign v=" + fmt(mvb.mean, 8) + " vs 597.25");
  return c;
}

// ---------------------------------------------------------------------------
// C4: detection quality grid
// ---------------------------------------------------------------------------

Check criterion4() {
  Check c;
  const int n = 100, reps = 20;
  const std::vector<int> counts = {5, 10, 15, 20, 25, 30};
  const std::vector<AttackKind> synth_attacks = {AttackKind::Gaussian, AttackKind::SignFlip,
                                                 AttackKind::ZeroGradient};

  // synthetic-model matrices: recall must be exactly 1 in every replicate,
  // mean precision >= 0.95 per cell
  for (AttackKind kind : synth_attacks) {
    for (int n0 : counts) {
      double min_recall = 1.0, sum_prec = 0;
      for (int r = 0; r < reps; ++r) {
        std::uint64_t seed = derive_seed(0xC4, {static_cast<std::uint64_t>(kind),
                                                static_cast<std::uint64_t>(n0),
                                                static_cast<std::uint64_t>(r)});
        GradientModelOptions opts;
        opts.sigma2 = 1.0;
        opts.sample_size = 100.0;
        auto model = make_gradient_model(n, n0, 100000,
                                         kind == AttackKind::Gaussian ? 0.5 : 0.7, seed, opts);
        auto m = synth_benign(model, derive_seed(seed, {1}));
        AttackSpec spec;
        spec.kind = kind;
        spec.malicious = model.malicious;
        spec.gaussian_variance = 30.0;
        spec.ratio_r = 3.0;
        spec.seed = derive_seed(seed, {2});
        m = apply_message_attack(m, spec);
        auto det = detect(m, g_threads);
        std::vector<int> truth(n, 0);
        for (int i : model.malicious) truth[i] = 1;
        auto mt = metrics(confusion_from_labels(truth, det.labels));
        min_recall = std::min(min_recall, mt.recall);
        sum_prec += mt.precision;
      }
      std::string cell = std::string(attack_kind_name(kind)) + "/n0=" + std::to_string(n0);
      c.require(min_recall == 1.0, cell + " synthetic min recall " + fmt(min_recall));
      c.require(sum_prec / reps >= 0.95,
                cell + " synthetic mean precision " + fmt(sum_prec / reps));
    }
  }

  // federated gradient matrices (softmax on blobs, full-batch epoch 0)
  const std::vector<AttackKind> fl_attacks = {AttackKind::Gaussian, AttackKind::SignFlip,
                                              AttackKind::ZeroGradient, AttackKind::LabelFlip};
  for (AttackKind kind : fl_attacks) {
    for (int n0 : counts) {
      double sum_recall = 0;
      for (int r = 0; r < reps; ++r) {
        std::uint64_t seed = derive_seed(0xC40F, {static_cast<std::uint64_t>(kind),
                                                  static_cast<std::uint64_t>(n0),
                                                  static_cast<std::uint64_t>(r)});
        FLConfig fl;
        fl.n = n;
        fl.full_batch = true;
        fl.seed = seed;
        Rng pick(seed, {0x6d616cull});
        std::vector<int> nodes(n);
        std::iota(nodes.begin(), nodes.end(), 0);
        for (int i = n - 1; i > 0; --i)
          std::swap(nodes[i], nodes[pick.uniform_below(static_cast<std::uint64_t>(i + 1))]);
        AttackSpec spec;
        spec.kind = kind;
        spec.malicious.assign(nodes.begin(), nodes.begin() + n0);
        std::sort(spec.malicious.begin(), spec.malicious.end());
        spec.gaussian_variance = 30.0;
        spec.ratio_r = 3.0;
        spec.seed = derive_seed(seed, {3});
        auto honest = federated_epoch_matrix(fl, spec, 0);
        auto m = apply_message_attack(honest, spec);
        auto det = detect(m, g_threads);
        std::vector<int> truth(n, 0);
        for (int i : spec.malicious) truth[i] = 1;
        sum_recall += metrics(confusion_from_labels(truth, det.labels)).recall;
      }
      double mean_recall = sum_recall / reps;
      std::string cell = std::string(attack_kind_name(kind)) + "/n0=" + std::to_string(n0);
      double gate = kind == AttackKind::LabelFlip ? 0.6 : 0.95;
      c.require(mean_recall >= gate,
                cell + " fl mean recall " + fmt(mean_recall) + " < " + fmt(gate));
    }
  }
  c.note("synthetic grid 3x6x20, federated grid 4x6x20");
  return c;
}

// ---------------------------------------------------------------------------
// C5: defense-in-loop accuracy trends
// ---------------------------------------------------------------------------

Check criterion5() {
  Check c;
  FLConfig fl;
  fl.n = 100;
  fl.epochs = 25;
  fl.seed = 0xC5;
  // defaults: softmax on blobs, d=64, K=10, 500 samples/node, batch 10

  Rng pick(0xC5, {0x6d616cull});
  std::vector<int> nodes(fl.n);
  std::iota(nodes.begin(), nodes.end(), 0);
  for (int i = fl.n - 1; i > 0; --i)
    std::swap(nodes[i], nodes[pick.uniform_below(static_cast<std::uint64_t>(i + 1))]);
  std::vector<int> malicious(nodes.begin(), nodes.begin() + 30);
  std::sort(malicious.begin(), malicious.end());

  auto attack_of = [&](AttackKind kind) {
    AttackSpec spec;
    spec.kind = kind;
    spec.malicious = malicious;
    spec.gaussian_variance = 30.0;
    spec.ratio_r = 3.0;
    spec.seed = derive_seed(0xC5, {static_cast<std::uint64_t>(kind)});
    return spec;
  };

  AggregationRule mean{AggregationKind::Mean, 0, 0};
  AttackSpec none;
  double clean = run_federated(fl, none, mean, g_threads).final_accuracy;

  // (a) zero-gradient with no defense freezes at chance
  double zg_mean =
      run_federated(fl, attack_of(AttackKind::ZeroGradient), mean, g_threads).final_accuracy;
  c.require(std::fabs(zg_mean - 0.1) <= 0.05,
            "ZG+mean accuracy " + fmt(zg_mean) + " not within 5 points of chance");

  // (b) detection-then-mean recovers for every attack
  AggregationRule defended{AggregationKind::ManderaThenMean, 0, 0};
  std::ostringstream accs;
  for (AttackKind kind : {AttackKind::Gaussian, AttackKind::SignFlip, AttackKind::ZeroGradient,
                          AttackKind::LabelFlip}) {
    double acc = run_federated(fl, attack_of(kind), defended, g_threads).final_accuracy;
    accs << attack_kind_name(kind) << "=" << fmt(acc, 4) << " ";
    c.require(acc >= clean - 0.02, std::string(attack_kind_name(kind)) + "+detection " +
                                       fmt(acc) + " vs clean " + fmt(clean));
  }

  // (c) median and trimmed mean also recover under ZG
  AggregationRule median{AggregationKind::Median, 0, 0};
  double med =
      run_federated(fl, attack_of(AttackKind::ZeroGradient), median, g_threads).final_accuracy;
  c.require(med >= clean - 0.05, "ZG+median " + fmt(med) + " vs clean " + fmt(clean));
  AggregationRule trimmed{AggregationKind::TrimmedMean, 0, 30};
  double trim =
      run_federated(fl, attack_of(AttackKind::ZeroGradient), trimmed, g_threads).final_accuracy;
  c.require(trim >= clean - 0.05, "ZG+trimmed " + fmt(trim) + " vs clean " + fmt(clean));

  c.note("clean=" + fmt(clean, 4) + ", ZG+mean=" + fmt(zg_mean, 4) + ", defended: " +
         accs.str() + "ZG+median=" + fmt(med, 4) + ", ZG+trimmed=" + fmt(trim, 4));
  return c;
}

// ---------------------------------------------------------------------------
// C6: baseline aggregators vs brute force
// ---------------------------------------------------------------------------

int krum_oracle(const MessageMatrix& m, int f) {
  const int n = m.n;
  const int k = n - f - 2;
  double best = HUGE_VAL;
  int arg = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> d;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0;
      for (std::int64_t q = 0; q < m.p; ++q) {
        double diff = m.at(i, q) - m.at(j, q);
        s += diff * diff;
      }
      d.push_back(s);
    }
    std::sort(d.begin(), d.end());
    double score = 0;
    for (int q = 0; q < k; ++q) score += d[q];
    if (score < best) {
      best = score;
      arg = i;
    }
  }
  return arg;
}

Check criterion6() {
  Check c;
  Rng rng(0xC6);
  int trials = 120;
  for (int t = 0; t < trials; ++t) {
    int n = 4 + static_cast<int>(rng.uniform_below(9));
    std::int64_t p = 1 + static_cast<std::int64_t>(rng.uniform_below(6));
    std::vector<double> vals(static_cast<std::size_t>(n) * p);
    for (auto& v : vals) v = rng.normal();
    auto m = make_matrix(n, p, std::move(vals));

    int f = static_cast<int>(rng.uniform_below(n - 3 + 1));
    if (krum_select(m, f) != krum_oracle(m, f)) {
      c.require(false, "krum mismatch at trial " + std::to_string(t));
      break;
    }
    int beta = static_cast<int>(rng.uniform_below((n - 1) / 2 + 1));
    auto tm = trimmed_mean(m, beta);
    auto med = coordinate_median(m);
    for (std::int64_t j = 0; j < p; ++j) {
      std::vector<double> col(n);
      for (int i = 0; i < n; ++i) col[i] = m.at(i, j);
      std::sort(col.begin(), col.end());
      double s = 0;
      for (int i = beta; i < n - beta; ++i) s += col[i];
      s /= (n - 2 * beta);
      if (std::fabs(tm[j] - s) > 1e-9 * std::max(1.0, std::fabs(s))) {
        c.require(false, "trimmed-mean mismatch at trial " + std::to_string(t));
        break;
      }
      double want = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
      if (med[j] != want) {
        c.require(false, "median mismatch at trial " + std::to_string(t));
        break;
      }
    }
    if (!c.ok) break;
  }

  // Bulyan excludes a planted outlier in >= 99/100 trials at f=1, n=7
  int excluded = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> vals(7 * 4);
    for (auto& v : vals) v = rng.normal();
    auto m = make_matrix(7, 4, std::move(vals));
    int outlier = static_cast<int>(rng.uniform_below(7));
    for (std::int64_t j = 0; j < m.p; ++j) m.at(outlier, j) = 1000.0 + rng.normal();
    auto sel = bulyan_selection(m, 1);
    if (std::find(sel.begin(), sel.end(), outlier) == sel.end()) ++excluded;
  }
  c.require(excluded >= 99, "bulyan excluded outlier only " + std::to_string(excluded) + "/100");
  c.note(std::to_string(trials) + " oracle trials, bulyan outlier excluded " +
         std::to_string(excluded) + "/100");
  return c;
}

// ---------------------------------------------------------------------------
// C7: timing ordering
// ---------------------------------------------------------------------------

Check criterion7() {
  Check c;
  const int n = 100, n0 = 30, repeats = 100;
  const std::int64_t p = 100000;
  GradientModelOptions opts;
  opts.sigma2 = 1.0;
  opts.sample_size = 100.0;
  auto model = make_gradient_model(n, n0, p, 0.5, 0xC7, opts);
  auto m = synth_benign(model, derive_seed(0xC7, {1}));
  AttackSpec spec;
  spec.kind = AttackKind::Gaussian;
  spec.malicious = model.malicious;
  spec.gaussian_variance = 30.0;
  spec.seed = derive_seed(0xC7, {2});
  m = apply_gaussian(m, spec);

  auto table = bench_defenses(m, {"mandera", "krum", "bulyan"}, repeats, n0, g_threads);
  double mandera_ms = 0, krum_ms = 0, bulyan_ms = 0;
  for (const auto& row : table.rows) {
    if (row.rule == "mandera") mandera_ms = row.mean_ms;
    if (row.rule == "krum") krum_ms = row.mean_ms;
    if (row.rule == "bulyan") bulyan_ms = row.mean_ms;
  }
  c.require(mandera_ms < 0.5 * krum_ms,
            "detection " + fmt(mandera_ms) + " ms not under half of krum " + fmt(krum_ms));
  c.require(mandera_ms < 0.1 * bulyan_ms, "detection " + fmt(mandera_ms) +
                                              " ms not under a tenth of bulyan " + fmt(bulyan_ms));
  c.note("p=" + std::to_string(p) + ", threads=" + std::to_string(g_threads) + ": detection=" +
         fmt(mandera_ms) + " ms, krum=" + fmt(krum_ms) + " ms, bulyan=" + fmt(bulyan_ms) + " ms");
  return c;
}

// ---------------------------------------------------------------------------
// C8: independence scan
// ---------------------------------------------------------------------------

Check criterion8() {
  Check c;
  const std::int64_t pairs = 10000;

  // fully independent synthetic columns pass KS at 1%
  Rng rng(0xC8);
  const int n = 100;
  const std::int64_t p = 5000;
  std::vector<double> vals(static_cast<std::size_t>(n) * p);
  for (auto& v : vals) v = rng.normal();
  auto indep = make_matrix(n, p, std::move(vals));
  auto scan = independence_scan(indep, pairs, derive_seed(0xC8, {1}));
  double crit = ks_critical_value(0.01, scan.p_values.size());
  c.require(scan.ks_distance < crit,
            "independent columns: KS " + fmt(scan.ks_distance) + " >= " + fmt(crit));

  // duplicated columns fail
  MessageMatrix clones(n, 256);
  for (int i = 0; i < n; ++i) {
    double v = rng.normal();
    for (std::int64_t j = 0; j < clones.p; ++j) clones.at(i, j) = v;
  }
  auto dup = independence_scan(clones, pairs, derive_seed(0xC8, {2}));
  double dup_crit = ks_critical_value(0.01, dup.p_values.size());
  c.require(dup.ks_distance > dup_crit,
            "duplicated columns: KS " + fmt(dup.ks_distance) + " <= " + fmt(dup_crit));

  // federated gradient matrix: KS distance reported, not gated
  FLConfig fl;
  fl.n = 100;
  fl.full_batch = true;
  fl.seed = 0xC80;
  AttackSpec none;
  auto grad = federated_epoch_matrix(fl, none, 0);
  auto fl_scan = independence_scan(grad, pairs, derive_seed(0xC8, {3}));
  c.note("independent KS=" + fmt(scan.ks_distance) + " (crit " + fmt(crit) +
         "), duplicated KS=" + fmt(dup.ks_distance) + ", federated-gradient KS=" +
         fmt(fl_scan.ks_distance) + " over " + std::to_string(fl_scan.p_values.size()) +
         " pairs");
  return c;
}

// ---------------------------------------------------------------------------
// C9: byte-identical reruns
// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Check criterion9() {
  Check c;
  auto base = std::filesystem::temp_directory_path() / "mandera_acceptance_c9";
  std::filesystem::remove_all(base);

  const char* cfg_text = R"({
    "dataset": {"type": "synthetic_blobs", "classes": 5, "dim": 12, "per_node": 60, "holdout": 300},
    "fl": {"nodes": 16, "epochs": 5},
    "attack": {"kind": "gaussian", "malicious_count": 4},
    "defense": {"rule": "mandera_then_mean"},
    "replicates": 2,
    "seed": 11,
    "mode": "simulate"
  })";
  auto cfg = ExperimentConfig::from_json_text(cfg_text);
  for (int run = 0; run < 2; ++run) {
    cfg.out_dir = (base / ("sim" + std::to_string(run))).string();
    run_experiment(cfg, run == 0 ? 2 : 1);  // thread count must not matter
  }
  int compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(base / "sim0")) {
    auto name = entry.path().filename();
    ++compared;
    if (slurp(entry.path()) != slurp(base / "sim1" / name))
      c.require(false, "simulate output differs: " + name.string());
  }
  c.require(compared > 0, "no simulate outputs written");

  auto grid_cfg = cfg;
  grid_cfg.mode = "detect-grid";
  grid_cfg.replicates = 1;
  DetectGrid grid;
  grid.attacks = {"gaussian", "sign_flip"};
  grid.malicious_counts = {3, 4};
  for (int run = 0; run < 2; ++run) {
    grid_cfg.out_dir = (base / ("grid" + std::to_string(run))).string();
    run_detect_grid(grid_cfg, grid, run == 0 ? 1 : 2);
  }
  for (const auto& entry : std::filesystem::directory_iterator(base / "grid0")) {
    auto name = entry.path().filename();
    if (slurp(entry.path()) != slurp(base / "grid1" / name))
      c.require(false, "detect-grid output differs: " + name.string());
  }

  // theory report determinism across thread counts
  auto model = make_gradient_model(40, 10, 2000, 0.7, 12);
  AttackSpec attack;
  attack.kind = AttackKind::SignFlip;
  attack.ratio_r = 3.0;
  std::vector<std::int64_t> ps = {2000, 8000};
  auto r1 = verify_limits(model, attack, 3, ps, 12, 5.0, 1).to_json();
  auto r2 = verify_limits(model, attack, 3, ps, 12, 5.0, 2).to_json();
  c.require(r1 == r2, "verify_limits JSON differs across thread counts");

  c.note("simulate, detect-grid and theory reports byte-identical across reruns and threads");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* name;
    std::function<Check()> fn;
  };
  const std::vector<Entry> entries = {
      {1, "rank correctness property suite", criterion1},
      {2, "gaussian-attack rank limits", criterion2},
      {3, "sign-flip/zero-gradient rank limits", criterion3},
      {4, "detection quality grid", criterion4},
      {5, "defense-in-loop accuracy trends", criterion5},
      {6, "baseline aggregators vs brute force", criterion6},
      {7, "timing ordering", criterion7},
      {8, "independence scan", criterion8},
      {9, "byte-identical reruns", criterion9},
  };

  std::string which = argc > 1 ? argv[1] : "all";
  if (const char* env = std::getenv("MANDERA_ACCEPT_THREADS")) g_threads = std::atoi(env);

  bool all_ok = true;
  for (const auto& e : entries) {
    if (which != "all" && which != std::to_string(e.id)) continue;
    auto t0 = clock_type::now();
    Check c;
    try {
      c = e.fn();
    } catch (const std::exception& ex) {
      c.ok = false;
      c.note(std::string("exception: ") + ex.what());
    }
    double secs = seconds_since(t0);
    std::printf("[%s] C%d %s (%.1f s)%s%s\n", c.ok ? "PASS" : "FAIL", e.id, e.name, secs,
                c.detail.empty() ? "" : ": ", c.detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && c.ok;
  }
  return all_ok ? 0 : 1;
}
