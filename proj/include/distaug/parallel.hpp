// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_PARALLEL_HPP_
#define DISTAUG_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace distaug {

// Runs fn(0..n) across up to `jobs` worker threads. Work items must be
// independent; each writes only its own output slot, so results do not
// depend on the worker count. The first exception is rethrown on the
// caller thread after all workers finish.
inline void parallel_for(size_t n, int jobs,
                         const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  const size_t workers =
      std::min(n, static_cast<size_t>(jobs < 1 ? 1 : jobs));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace distaug

#endif  // DISTAUG_PARALLEL_HPP_
