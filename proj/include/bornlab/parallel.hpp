#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bornlab {

/// Worker count used when a caller passes 0: $BORNLAB_THREADS if set,
/// otherwise the hardware concurrency capped at 8.
unsigned default_thread_count();

/// Runs body(begin, end) over a static contiguous partition of [0, n).
/// The partition depends only on (n, threads), so per-index work is
/// identical for any thread count.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads == 0) threads = default_thread_count();
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(std::size_t{0}, std::min(n, chunk));
}

}  // namespace bornlab
