#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace taxnet {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(i) for i in [begin, end) over contiguous chunks. The body must
// only write to state owned by index i.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, Body&& body) {
  const std::size_t n = end > begin ? end - begin : 0;
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2048) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace taxnet
