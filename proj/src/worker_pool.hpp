#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "shapelab/errors.hpp"

namespace shapelab::detail {

// Runs jobs 0..count-1 on up to `workers` threads. Each job must write
// only its own result slot, so no further synchronization is needed.
// Library errors are deterministic and propagate directly; any other
// exception (allocation pressure, system hiccups) gets one retry first.
// After all workers drain, the first failed job in job order rethrows.
inline void run_jobs(int count, int workers, const std::function<void(int)>& job) {
  if (count <= 0) return;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  const auto run_one = [&](int index) {
    try {
      job(index);
      return;
    } catch (const Error&) {
      errors[static_cast<std::size_t>(index)] = std::current_exception();
      return;
    } catch (...) {
    }
    try {
      job(index);
    } catch (...) {
      errors[static_cast<std::size_t>(index)] = std::current_exception();
    }
  };

  const int n_threads = std::max(1, std::min(workers, count));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int index = next.fetch_add(1);
        if (index >= count) return;
        run_one(index);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace shapelab::detail
