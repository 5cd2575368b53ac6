#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace smalldev {

namespace detail {
inline std::atomic<unsigned>& thread_cap_storage() {
  static std::atomic<unsigned> cap{0};
  return cap;
}
}  // namespace detail

/// Caps the worker count. Zero means: SMALLDEV_THREADS if set, otherwise
/// the hardware concurrency.
inline void set_thread_cap(unsigned cap) { detail::thread_cap_storage() = cap; }

inline unsigned thread_cap() {
  unsigned cap = detail::thread_cap_storage();
  if (cap == 0) {
    if (const char* env = std::getenv("SMALLDEV_THREADS")) {
      try {
        cap = static_cast<unsigned>(std::stoul(env));
      } catch (...) {
        cap = 0;
      }
    }
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

/// Runs body(i) for i in [0, count). Each index is executed exactly once and
/// must write only to its own output slot; the thread count therefore never
/// changes results.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_cap(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace smalldev
