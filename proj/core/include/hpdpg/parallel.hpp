#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hpdpg {

/// Runs f(i) for i in [begin, end) on up to `threads` workers with a static
/// contiguous partition. Results written to per-index slots are therefore
/// independent of the thread count. The first exception is rethrown.
template <class F>
void parallel_for(int begin, int end, int threads, F&& f) {
  const int n = end - begin;
  if (n <= 0) return;
  const int nt = std::clamp(threads, 1, n);
  if (nt == 1) {
    for (int i = begin; i < end; ++i) f(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const int lo = begin + static_cast<int>(static_cast<long long>(n) * t / nt);
    const int hi = begin + static_cast<int>(static_cast<long long>(n) * (t + 1) / nt);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

} // namespace hpdpg
