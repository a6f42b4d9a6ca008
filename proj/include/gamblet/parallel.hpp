#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "gamblet/sparse.hpp"

namespace gamblet {

/// 0 means one worker per hardware thread.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i, worker) for every i in [0, n). Work is handed out in small
/// chunks from a shared counter; callers keep per-worker scratch indexed by
/// `worker` and write results to slot i, so the outcome does not depend on
/// scheduling. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(Index n, int threads, Body&& body) {
  const int workers = std::min<int>(resolve_threads(threads), std::max<Index>(n, 1));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) body(i, 0);
    return;
  }
  constexpr Index kChunk = 16;
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](int worker) {
    try {
      for (;;) {
        const Index begin = next.fetch_add(kChunk);
        if (begin >= n) break;
        const Index end = std::min(n, begin + kChunk);
        for (Index i = begin; i < end; ++i) body(i, worker);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gamblet
