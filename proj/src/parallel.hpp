#pragma once

// Fork-join over disjoint node ranges. Worker count is capped by the
// SPACELIKE_MCF_THREADS environment variable. Chunk boundaries depend only on
// the range size and the worker count, and every chunk writes disjoint
// output, so results do not depend on scheduling.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace smcf::detail {

inline int worker_count() {
  static const int count = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* cap = std::getenv("SPACELIKE_MCF_THREADS")) {
      const int c = std::atoi(cap);
      if (c >= 1) hw = std::min(hw, c);
    }
    return hw;
  }();
  return count;
}

/// Below this many items a single chunk runs on the calling thread.
inline constexpr std::size_t kParallelThreshold = 4096;

inline int chunk_count(std::size_t n) {
  return n < kParallelThreshold ? 1 : worker_count();
}

/// Calls f(chunk, begin, end) for chunk_count(n) contiguous ranges.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const int chunks = chunk_count(n);
  if (chunks == 1) {
    f(0, std::size_t{0}, n);
    return;
  }
  const std::size_t per = (n + chunks - 1) / chunks;
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> pool;
    pool.reserve(chunks - 1);
    for (int c = 1; c < chunks; ++c) {
      const std::size_t b = std::min(n, c * per);
      const std::size_t e = std::min(n, b + per);
      pool.emplace_back([&f, &errors, c, b, e] {
        try {
          f(c, b, e);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    try {
      f(0, std::size_t{0}, std::min(n, per));
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace smcf::detail
