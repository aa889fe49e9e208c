#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace alphadesk {

/// Runs fn(i) for i in [0, n) on `workers` threads. Work is handed out by an
/// atomic counter; each call writes only to its own index, so results do not
/// depend on worker count or scheduling. workers <= 1 runs inline.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) break;
      fn(i);
    }
  };
  std::size_t t_count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> threads;
  threads.reserve(t_count);
  for (std::size_t t = 0; t < t_count; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
}

}  // namespace alphadesk
