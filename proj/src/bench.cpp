#include "mandera/bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mandera/detect.hpp"
#include "mandera/report.hpp"

namespace mandera {

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
  auto t0 = clock_type::now();
  fn();
  auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

BenchTable bench_defenses(const MessageMatrix& m, const std::vector<std::string>& rules,
                          int repeats, int assumed_f, int threads) {
  if (repeats < 1) throw std::invalid_argument("bench: repeats >= 1");
  validate_matrix(m);
  BenchTable table;
  table.n = m.n;
  table.p = m.p;
  table.n0 = assumed_f;
  table.threads = threads;

  std::vector<int> all(m.n);
  std::iota(all.begin(), all.end(), 0);
  // Bulyan caps its parameter at its validity bound.
  const int bulyan_f = std::min(assumed_f, (m.n - 3) / 4);

  volatile double sink = 0;
  for (const auto& rule : rules) {
    std::function<void()> fn;
    if (rule == "mandera") {
      fn = [&] { sink = sink + detect(m, threads).centroids[0][0]; };
    } else if (rule == "krum") {
      fn = [&] { sink = sink + krum_select(m, assumed_f, threads); };
    } else if (rule == "bulyan") {
      fn = [&] { sink = sink + bulyan_selection(m, bulyan_f, threads).front(); };
    } else if (rule == "trimmed_mean") {
      fn = [&] { sink = sink + trimmed_mean(m, assumed_f)[0]; };
    } else if (rule == "median") {
      fn = [&] { sink = sink + coordinate_median(m)[0]; };
    } else if (rule == "mean") {
      fn = [&] { sink = sink + aggregate_mean(m, all)[0]; };
    } else {
      throw std::invalid_argument("bench: unknown rule " + rule);
    }

    fn();  // warmup
    std::vector<double> times(repeats);
    for (int r = 0; r < repeats; ++r) times[r] = time_ms(fn);

    BenchRow row;
    row.rule = rule;
    row.repeats = repeats;
    double sum = 0;
    for (double t : times) sum += t;
    row.mean_ms = sum / repeats;
    if (repeats > 1) {
      double ss = 0;
      for (double t : times) {
        double d = t - row.mean_ms;
        ss += d * d;
      }
      row.sd_ms = std::sqrt(ss / (repeats - 1));
    }
    table.rows.push_back(row);
  }
  return table;
}

std::string BenchTable::to_csv() const {
  std::ostringstream os;
  os << "rule,n,p,n0,threads,repeats,mean_ms,sd_ms\n";
  for (const auto& r : rows)
    os << r.rule << "," << n << "," << p << "," << n0 << "," << threads << "," << r.repeats
       << "," << format_double(r.mean_ms) << "," << format_double(r.sd_ms) << "\n";
  return os.str();
}

}  // namespace mandera
