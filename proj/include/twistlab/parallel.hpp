#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace twistlab {

// Striped index-parallel loop.  Each index is processed exactly once and
// writes only its own slot, so results are independent of the thread
// count; the first exception is rethrown on the caller.
template <typename F>
void indexed_parallel(std::size_t n, int threads, F&& body) {
  const int k = std::max(1, threads);
  if (k == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mutex;
  for (int t = 0; t < k; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = std::size_t(t); i < n; i += std::size_t(k))
          body(i);
      } catch (...) {
        std::scoped_lock lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace twistlab
