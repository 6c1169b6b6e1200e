#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace relucert {

inline int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

/// Applies `fn(i)` for i in [0, n) on up to `workers` threads and returns
/// the results indexed by i. `fn` must be safe to run concurrently. Results
/// land in input order, so callers that consume them sequentially behave
/// identically for any worker count.
template <typename Fn>
auto parallel_map(std::size_t n, int workers, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> results(n);
  if (n == 0) return results;
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) results[i] = fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
  return results;
}

}  // namespace relucert
