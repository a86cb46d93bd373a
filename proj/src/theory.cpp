#include "mandera/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mandera/parallel.hpp"
#include "mandera/rank.hpp"
#include "mandera/report.hpp"
#include "mandera/rng.hpp"
#include "mandera/stats.hpp"

namespace mandera {

std::vector<int> GradientModel::benign_set() const {
  std::vector<char> bad(n, 0);
  for (int i : malicious) bad[i] = 1;
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!bad[i]) out.push_back(i);
  return out;
}

void GradientModel::validate() const {
  if (n < 2 || p < 1) throw std::invalid_argument("gradient model: need n >= 2, p >= 1");
  if (static_cast<std::int64_t>(mu.size()) != p ||
      static_cast<std::int64_t>(sigma2.size()) != p)
    throw std::invalid_argument("gradient model: mu/sigma2 size mismatch");
  if (static_cast<int>(sample_sizes.size()) != n)
    throw std::invalid_argument("gradient model: sample_sizes size mismatch");
  for (double s2 : sigma2)
    if (!(s2 >= 0) || !std::isfinite(s2))
      throw std::invalid_argument("gradient model: sigma2 must be finite and >= 0");
  for (double N : sample_sizes)
    if (!(N >= 1)) throw std::invalid_argument("gradient model: sample sizes must be >= 1");
}

GradientModel make_gradient_model(int n, int n0, std::int64_t p, double rho,
                                  std::uint64_t seed, GradientModelOptions opts) {
  if (n0 < 0 || n0 >= n) throw std::invalid_argument("make_gradient_model: need 0 <= n0 < n");
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("make_gradient_model: rho in [0,1]");
  GradientModel model;
  model.n = n;
  model.p = p;
  model.sigma2.assign(p, opts.sigma2);
  model.sample_sizes.assign(n, opts.sample_size);

  // Exactly floor(rho*p) positive dimensions, positions shuffled: the
  // realized positive fraction matches rho up to 1/p, keeping the
  // sign-dependent limits sharp at finite p.
  model.mu.resize(p);
  const std::int64_t npos = static_cast<std::int64_t>(std::floor(rho * static_cast<double>(p)));
  Rng mu_rng(seed, {0x6d75ull});  // "mu"
  std::vector<std::int64_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  for (std::int64_t j = p - 1; j > 0; --j)
    std::swap(order[j], order[mu_rng.uniform_below(static_cast<std::uint64_t>(j + 1))]);
  for (std::int64_t k = 0; k < p; ++k) {
    double mag = std::fabs(mu_rng.normal()) + opts.mu_floor;
    model.mu[order[k]] = (k < npos) ? mag : -mag;
  }

  Rng mal_rng(seed, {0x6d616cull});  // "mal"
  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(nodes[i], nodes[mal_rng.uniform_below(static_cast<std::uint64_t>(i + 1))]);
  model.malicious.assign(nodes.begin(), nodes.begin() + n0);
  std::sort(model.malicious.begin(), model.malicious.end());
  return model;
}

MessageMatrix synth_benign(const GradientModel& model, std::uint64_t seed) {
  model.validate();
  MessageMatrix m(model.n, model.p);
  std::vector<double> sd(model.p);
  auto benign = model.benign_set();
  for (int i : benign) {
    for (std::int64_t j = 0; j < model.p; ++j)
      sd[j] = std::sqrt(model.sigma2[j] / model.sample_sizes[i]);
    Rng rng(seed, {0x62656e69676eull, static_cast<std::uint64_t>(i)});  // "benign", i
    double* row = m.values.data() + static_cast<std::size_t>(i) * model.p;
    for (std::int64_t j = 0; j < model.p; ++j) row[j] = model.mu[j] + sd[j] * rng.normal();
  }
  return m;
}

MessageMatrix apply_gaussian_diag(const MessageMatrix& m, std::span<const int> malicious,
                                  std::span<const double> sigma2_diag, std::uint64_t seed) {
  if (static_cast<std::int64_t>(sigma2_diag.size()) != m.p)
    throw std::invalid_argument("apply_gaussian_diag: sigma2 size mismatch");
  std::vector<char> is_mal(m.n, 0);
  for (int i : malicious) is_mal[i] = 1;
  std::vector<int> benign;
  for (int i = 0; i < m.n; ++i)
    if (!is_mal[i]) benign.push_back(i);
  std::vector<double> mb = benign_mean(m, benign);
  std::vector<double> sd(m.p);
  for (std::int64_t j = 0; j < m.p; ++j) sd[j] = std::sqrt(sigma2_diag[j]);
  MessageMatrix out = m;
  Rng rng(seed, {0x676469616750ull});
  for (int i : malicious) {
    double* row = out.values.data() + static_cast<std::size_t>(i) * m.p;
    for (std::int64_t j = 0; j < m.p; ++j) row[j] = mb[j] + sd[j] * rng.normal();
  }
  return out;
}

double sq_mean_range(std::int64_t a, std::int64_t b) {
  if (a < 1 || b < a) throw std::invalid_argument("sq_mean_range: need 1 <= a <= b");
  auto cube_sum = [](std::int64_t k) {
    // sum of squares 1..k
    return static_cast<long double>(k) * (k + 1) * (2 * k + 1) / 6.0L;
  };
  long double total = cube_sum(b) - cube_sum(a - 1);
  return static_cast<double>(total / static_cast<long double>(b - a + 1));
}

TheoremLimits limits_signflip(int n, int n0, double rho) {
  if (n0 < 1 || n0 >= n) throw std::invalid_argument("limits_signflip: need 1 <= n0 < n");
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("limits_signflip: rho in [0,1]");
  const int n1 = n - n0;
  TheoremLimits lim;
  lim.rho = rho;
  lim.mu_b = rho * 0.5 * (n1 + 1) + (1.0 - rho) * 0.5 * (n + n0 + 1);
  lim.mu_m = rho * 0.5 * (n + n1 + 1) + (1.0 - rho) * 0.5 * (n0 + 1);
  lim.tau_b = rho * sq_mean_range(1, n1) + (1.0 - rho) * sq_mean_range(n0 + 1, n);
  lim.tau_m = rho * sq_mean_range(n1 + 1, n) + (1.0 - rho) * sq_mean_range(1, n0);
  lim.s2_b = lim.tau_b - lim.mu_b * lim.mu_b;
  lim.s2_m = lim.tau_m - lim.mu_m * lim.mu_m;
  lim.s2_m_tied = lim.s2_m - (static_cast<double>(n0) * n0 - 1.0) / 12.0;
  return lim;
}

TheoremLimits limits_gaussian(int n, int n0) {
  if (n0 < 1 || n0 >= n) throw std::invalid_argument("limits_gaussian: need 1 <= n0 < n");
  TheoremLimits lim;
  lim.rho = 0.5;
  lim.mu_b = lim.mu_m = 0.5 * (n + 1);
  lim.tau_b = lim.tau_m = std::nan("");
  lim.s2_b = lim.s2_m = lim.s2_m_tied = std::nan("");
  return lim;
}

namespace {

struct ReplicateMoments {
  double e_b = 0, v_b = 0, e_m = 0, v_m = 0;
};

ReplicateMoments replicate_moments(const GradientModel& model, const AttackSpec& attack,
                                   std::uint64_t rep_seed) {
  MessageMatrix m = synth_benign(model, rep_seed);
  AttackSpec a = attack;
  a.malicious = model.malicious;
  a.seed = rep_seed ^ 0x5a5a5a5aull;
  m = apply_message_attack(m, a);
  NodeMoments mo = node_moments(m);
  ReplicateMoments out;
  auto benign = model.benign_set();
  for (int i : benign) {
    out.e_b += mo.e[i];
    out.v_b += mo.v[i];
  }
  out.e_b /= static_cast<double>(benign.size());
  out.v_b /= static_cast<double>(benign.size());
  for (int i : model.malicious) {
    out.e_m += mo.e[i];
    out.v_m += mo.v[i];
  }
  out.e_m /= static_cast<double>(model.malicious.size());
  out.v_m /= static_cast<double>(model.malicious.size());
  return out;
}

// Rebuilds the mean vector at a new width with the same realized positive
// fraction (exact counts again), keeping the node layout of the template.
GradientModel rebuild_width(const GradientModel& model, std::int64_t p, std::uint64_t seed) {
  double rho = 0;
  for (double v : model.mu) rho += v > 0 ? 1 : 0;
  rho = model.mu.empty() ? 0.5 : rho / static_cast<double>(model.mu.size());
  GradientModelOptions opts;
  opts.sigma2 = model.sigma2.empty() ? 1.0 : model.sigma2[0];
  opts.sample_size = model.sample_sizes.empty() ? 1e4 : model.sample_sizes[0];
  GradientModel out = make_gradient_model(model.n, static_cast<int>(model.malicious.size()),
                                          p, rho, seed, opts);
  out.malicious = model.malicious;
  out.sample_sizes = model.sample_sizes;
  return out;
}

}  // namespace

MomentEstimate estimate_rank_moments(const GradientModel& model, const AttackSpec& attack,
                                     int replicates, std::int64_t p, std::uint64_t seed,
                                     int threads) {
  if (replicates < 1) throw std::invalid_argument("estimate_rank_moments: replicates >= 1");
  GradientModel sized = model;
  if (sized.p != p)
    sized = rebuild_width(model, p, derive_seed(seed, {0x7769647468ull, static_cast<std::uint64_t>(p)}));
  std::vector<ReplicateMoments> reps(replicates);
  parallel_for(static_cast<std::size_t>(replicates), threads,
               [&](std::size_t lo, std::size_t hi) {
                 for (std::size_t r = lo; r < hi; ++r)
                   reps[r] = replicate_moments(sized, attack,
                                               derive_seed(seed, {0x726570ull, r}));
               });
  std::vector<double> eb(replicates), vb(replicates), em(replicates), vm(replicates);
  for (int r = 0; r < replicates; ++r) {
    eb[r] = reps[r].e_b;
    vb[r] = reps[r].v_b;
    em[r] = reps[r].e_m;
    vm[r] = reps[r].v_m;
  }
  MomentEstimate est;
  est.replicates = replicates;
  est.p = p;
  auto mb = mean_se(eb);
  est.benign.mean_e = mb.mean;
  est.benign.se_e = mb.se;
  auto vb2 = mean_se(vb);
  est.benign.mean_v = vb2.mean;
  est.benign.se_v = vb2.se;
  auto mm = mean_se(em);
  est.malicious.mean_e = mm.mean;
  est.malicious.se_e = mm.se;
  auto vm2 = mean_se(vm);
  est.malicious.mean_v = vm2.mean;
  est.malicious.se_v = vm2.se;
  return est;
}

VerificationReport verify_limits(const GradientModel& model, const AttackSpec& attack,
                                 int replicates, std::span<const std::int64_t> p_values,
                                 std::uint64_t seed, double tolerance_se_factor,
                                 int threads) {
  if (p_values.empty()) throw std::invalid_argument("verify_limits: no p values");
  VerificationReport rep;
  rep.attack = attack_kind_name(attack.kind);
  rep.n = model.n;
  rep.n0 = static_cast<int>(model.malicious.size());
  rep.tolerance_se_factor = tolerance_se_factor;

  double rho = 0;
  for (double v : model.mu) rho += v > 0 ? 1 : 0;
  rho /= static_cast<double>(model.mu.size());
  rep.rho = rho;

  const bool signflip_family =
      attack.kind == AttackKind::SignFlip || attack.kind == AttackKind::ZeroGradient;
  if (signflip_family) {
    rep.limits = limits_signflip(model.n, rep.n0, rho);
  } else {
    rep.limits = limits_gaussian(model.n, rep.n0);
    // Monte Carlo stands in for the missing closed-form variance limits,
    // estimated at the largest requested width with an independent stream.
    std::int64_t pmax = *std::max_element(p_values.begin(), p_values.end());
    auto est = estimate_rank_moments(model, attack, replicates, pmax,
                                     derive_seed(seed, {0x6c696d5full}), threads);
    rep.limits.s2_b = est.benign.mean_v;
    rep.limits.s2_m = est.malicious.mean_v;
    rep.limits.s2_m_tied = est.malicious.mean_v;
    rep.limit_se_v_b = est.benign.se_v;
    rep.limit_se_v_m = est.malicious.se_v;
  }

  const std::int64_t pmax = *std::max_element(p_values.begin(), p_values.end());
  const int n1 = model.n - rep.n0;
  for (std::int64_t p : p_values) {
    auto est = estimate_rank_moments(model, attack, replicates, p, seed, threads);
    VerificationRow row;
    row.p = p;
    row.benign = est.benign;
    row.malicious = est.malicious;
    row.dev_e_b = std::fabs(est.benign.mean_e - rep.limits.mu_b);
    row.dev_e_m = std::fabs(est.malicious.mean_e - rep.limits.mu_m);
    // v subtracts the sample mean e_i, which removes Var(e_i) =
    // (within-column rank variance)/p; gate against that exact finite-p
    // expectation rather than the bare limit.
    double vb_limit, vm_limit;
    if (signflip_family) {
      // benign ranks are uniform on a block of n1 consecutive positions;
      // tied malicious ranks are column-deterministic
      vb_limit = rep.limits.s2_b -
                 (static_cast<double>(n1) * n1 - 1.0) / 12.0 / static_cast<double>(p);
      vm_limit = rep.limits.s2_m_tied;
    } else {
      // under GA the whole variance is within-column: E v(p) = V (1 - 1/p),
      // and the MC limit was itself measured at pmax
      double scale = (1.0 - 1.0 / static_cast<double>(p)) /
                     (1.0 - 1.0 / static_cast<double>(pmax));
      vb_limit = rep.limits.s2_b * scale;
      vm_limit = rep.limits.s2_m * scale;
    }
    row.dev_v_b = std::fabs(est.benign.mean_v - vb_limit);
    row.dev_v_m = std::fabs(est.malicious.mean_v - vm_limit);
    double tol_v_b = std::hypot(est.benign.se_v, rep.limit_se_v_b);
    double tol_v_m = std::hypot(est.malicious.se_v, rep.limit_se_v_m);
    row.pass_e = row.dev_e_b <= tolerance_se_factor * std::max(est.benign.se_e, 1e-12) &&
                 row.dev_e_m <= tolerance_se_factor * std::max(est.malicious.se_e, 1e-12);
    row.pass_v = row.dev_v_b <= tolerance_se_factor * std::max(tol_v_b, 1e-12) &&
                 row.dev_v_m <= tolerance_se_factor * std::max(tol_v_m, 1e-12);
    rep.rows.push_back(row);
  }

  if (rep.rows.size() >= 2) {
    auto max_dev = [](const VerificationRow& r) {
      return std::max(std::max(r.dev_e_b, r.dev_e_m), std::max(r.dev_v_b, r.dev_v_m));
    };
    rep.deviation_shrinks = max_dev(rep.rows.back()) < max_dev(rep.rows.front());
  }
  rep.all_pass = std::all_of(rep.rows.begin(), rep.rows.end(),
                             [](const VerificationRow& r) { return r.pass_e && r.pass_v; });
  return rep;
}

std::string VerificationReport::to_json() const {
  std::ostringstream os;
  os << "{\"attack\":\"" << attack << "\",\"n\":" << n << ",\"n0\":" << n0
     << ",\"rho\":" << format_double(rho) << ",\"limits\":{\"mu_b\":" << format_double(limits.mu_b)
     << ",\"mu_m\":" << format_double(limits.mu_m) << ",\"s2_b\":" << format_double(limits.s2_b)
     << ",\"s2_m\":" << format_double(limits.s2_m)
     << ",\"s2_m_tied\":" << format_double(limits.s2_m_tied) << "}"
     << ",\"tolerance_se_factor\":" << format_double(tolerance_se_factor) << ",\"rows\":[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << (i ? "," : "") << "{\"p\":" << r.p << ",\"benign\":{\"mean_e\":"
       << format_double(r.benign.mean_e) << ",\"se_e\":" << format_double(r.benign.se_e)
       << ",\"mean_v\":" << format_double(r.benign.mean_v)
       << ",\"se_v\":" << format_double(r.benign.se_v) << "},\"malicious\":{\"mean_e\":"
       << format_double(r.malicious.mean_e) << ",\"se_e\":" << format_double(r.malicious.se_e)
       << ",\"mean_v\":" << format_double(r.malicious.mean_v)
       << ",\"se_v\":" << format_double(r.malicious.se_v) << "},\"dev_e_b\":"
       << format_double(r.dev_e_b) << ",\"dev_e_m\":" << format_double(r.dev_e_m)
       << ",\"dev_v_b\":" << format_double(r.dev_v_b)
       << ",\"dev_v_m\":" << format_double(r.dev_v_m)
       << ",\"pass_e\":" << (r.pass_e ? "true" : "false")
       << ",\"pass_v\":" << (r.pass_v ? "true" : "false") << "}";
  }
  os << "],\"deviation_shrinks\":" << (deviation_shrinks ? "true" : "false")
     << ",\"all_pass\":" << (all_pass ? "true" : "false") << "}";
  return os.str();
}

IndependenceScan independence_scan(const MessageMatrix& m, std::int64_t pairs,
                                   std::uint64_t seed) {
  validate_matrix(m);
  if (m.n < 3) throw std::invalid_argument("independence_scan: need n >= 3");
  const std::int64_t max_pairs = m.p * (m.p - 1) / 2;
  if (pairs < 1 || pairs > max_pairs)
    throw std::invalid_argument("independence_scan: pairs must be in [1, p(p-1)/2]");
  IndependenceScan scan;
  scan.pairs_requested = pairs;
  Rng rng(seed, {0x696e646570ull});
  std::vector<double> x(m.n), y(m.n);
  const double nu = static_cast<double>(m.n - 2);
  for (std::int64_t k = 0; k < pairs; ++k) {
    std::int64_t j1 = static_cast<std::int64_t>(rng.uniform_below(m.p));
    std::int64_t j2 = static_cast<std::int64_t>(rng.uniform_below(m.p - 1));
    if (j2 >= j1) ++j2;
    for (int i = 0; i < m.n; ++i) {
      x[i] = m.at(i, j1);
      y[i] = m.at(i, j2);
    }
    double r = pearson(x, y);
    if (std::isnan(r)) {
      ++scan.pairs_skipped;
      continue;
    }
    double denom = 1.0 - r * r;
    double p_value;
    if (denom <= 0.0) {
      p_value = 0.0;  // perfectly correlated pair
    } else {
      double t = r * std::sqrt(nu / denom);
      p_value = t_test_two_sided_p(t, nu);
    }
    scan.p_values.push_back(p_value);
  }
  if (!scan.p_values.empty()) scan.ks_distance = ks_uniform_distance(scan.p_values);
  return scan;
}

std::string IndependenceScan::to_json() const {
  std::ostringstream os;
  os << "{\"pairs_requested\":" << pairs_requested << ",\"pairs_skipped\":" << pairs_skipped
     << ",\"pairs_tested\":" << p_values.size()
     << ",\"ks_distance\":" << format_double(ks_distance) << "}";
  return os.str();
}

}  // namespace mandera
