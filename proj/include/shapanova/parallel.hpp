#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace shapanova {

/// Worker count from SHAPANOVA_WORKERS (default 1).
inline int worker_count() {
  const char* env = std::getenv("SHAPANOVA_WORKERS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

/// Runs fn(i) for i in [0, count). With more than one worker, indices are
/// striped across threads; fn must write only to its own output slot, which
/// keeps results identical for any worker count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         int workers = worker_count()) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const auto used = static_cast<std::size_t>(workers);
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < count; i += used) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace shapanova
