#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace latticeperm {

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, count) into a fixed grid of chunks and hands them to workers.
// The chunk grid is independent of the worker count, so per-chunk results
// reduce to identical totals no matter how many threads run.
inline void for_chunks(std::uint64_t count, int threads, int chunks,
                       const std::function<void(int, std::uint64_t, std::uint64_t)>& body) {
  if (count == 0) return;
  if (chunks < 1) chunks = 1;
  if (static_cast<std::uint64_t>(chunks) > count) chunks = static_cast<int>(count);
  const int workers = std::min(resolve_threads(threads), chunks);

  auto run_chunk = [&](int chunk) {
    const std::uint64_t begin = count * static_cast<std::uint64_t>(chunk) / chunks;
    const std::uint64_t end = count * (static_cast<std::uint64_t>(chunk) + 1) / chunks;
    body(chunk, begin, end);
  };

  if (workers <= 1) {
    for (int c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) run_chunk(c);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace latticeperm
