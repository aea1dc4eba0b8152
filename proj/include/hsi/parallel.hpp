#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace hsi {

/// Worker count used by parallel_for; 1 keeps everything on the caller.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Calls fn(i) for i in [0, n) split into contiguous chunks. Each index must
/// write only its own outputs so results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace hsi
