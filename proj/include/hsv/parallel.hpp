#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hsv {

namespace detail {
inline std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{0};
  return cap;
}
}  // namespace detail

// 0 means hardware concurrency.
inline void set_max_threads(int n) { detail::thread_cap() = std::max(0, n); }

inline int max_threads() {
  const int cap = detail::thread_cap();
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return cap > 0 ? cap : hw;
}

// Runs body(i) for i in [0, n) on up to max_threads() workers; the first
// exception thrown by any worker is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, Body body) {
  const int workers = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(max_threads())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace hsv
