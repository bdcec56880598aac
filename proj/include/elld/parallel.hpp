#pragma once
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

// Deterministic parallelism helper. Work is split into a schedule-independent
// number of blocks; callers write per-block results into preallocated slots
// and combine them in block order, so outputs are byte-identical for any
// thread count (exact types make this trivial; floating point relies on the
// fixed block boundaries + fixed combination order).

namespace elld {

inline int& thread_count_ref() {
  static int n = []() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : (int)hc;
  }();
  return n;
}

inline void set_threads(int n) { thread_count_ref() = n < 1 ? 1 : n; }
inline int get_threads() { return thread_count_ref(); }

template <class F>
inline void parallel_blocks(std::size_t nblocks, F&& fn) {
  int nt = get_threads();
  if (nt <= 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= nblocks || failed.load()) return;
      try {
        fn(b);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int spawn = nt < (int)nblocks ? nt : (int)nblocks;
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load() && err) std::rethrow_exception(err);
}

}  // namespace elld
