#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace trackforge {

// Process-wide cap on worker threads used by internal loops; 0 = hardware
// concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

// Runs fn(i) for i in [0, n) across up to thread_count() threads. fn must
// only write to state owned by index i, which keeps results independent of
// the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, n, w, workers] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

}  // namespace trackforge
