#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace detour {

// Resolves the worker-thread count: explicit request, then the
// DETOUR_CHOICE_THREADS environment variable, then hardware concurrency.
inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("DETOUR_CHOICE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Observations are split into fixed-size chunks; each chunk is processed
// sequentially and chunk results are combined in index order afterwards.
// The chunk size never depends on the thread count, so results are
// bit-identical no matter how many workers run.
inline constexpr std::size_t kParallelChunk = 32;

// fn(chunk_index, begin, end) must only write to its own chunk's slot.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t n_chunks = (n + kParallelChunk - 1) / kParallelChunk;
  if (threads <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t begin = c * kParallelChunk;
      const std::size_t end = std::min(begin + kParallelChunk, n);
      fn(c, begin, end);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::size_t begin = c * kParallelChunk;
      const std::size_t end = std::min(begin + kParallelChunk, n);
      fn(c, begin, end);
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_workers =
      std::min<std::size_t>(threads, n_chunks);
  pool.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline std::size_t chunk_count(std::size_t n) {
  return (n + kParallelChunk - 1) / kParallelChunk;
}

}  // namespace detour
