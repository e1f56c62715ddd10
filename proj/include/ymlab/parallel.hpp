#pragma once

// Minimal chunked parallel_for for per-site kernels with disjoint writes.
// Results are identical for any thread count; reductions stay sequential.

#include <cstdint>
#include <thread>
#include <vector>

namespace ymlab {

template <typename Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 1024) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min<std::int64_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn]() {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ymlab
