#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ccgp {

/// Runs fn(i) for i in [0, n) across up to `workers` threads with static
/// striping. Callers write to disjoint slots, so results are identical for
/// any worker count.
inline void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const int w = static_cast<int>(std::min<long>(workers, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (long i = t; i < n; i += w) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ccgp
