#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mandera {

/// Runs fn(begin, end) over [0, count) split into contiguous ranges, one per
/// thread. With threads <= 1 this is a plain call. Work is partitioned
/// statically so a given (count, threads) always yields the same ranges.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    fn(0, count);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::vector<std::exception_ptr> errors(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    std::size_t lo = count * t / nthreads;
    std::size_t hi = count * (t + 1) / nthreads;
    pool.emplace_back([&fn, lo, hi, t, &errors]() {
      try {
        fn(lo, hi);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mandera
