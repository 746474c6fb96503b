#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace adasmooth {

//! Number of workers to use when the caller asked for `requested` (0 means
//! all hardware threads).
inline unsigned
worker_count(unsigned requested, std::size_t n_tasks)
{
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned w = requested == 0 ? hw : requested;
  return static_cast<unsigned>(
    std::max<std::size_t>(1, std::min<std::size_t>(w, n_tasks)));
}

//! Runs fn(i) for i in [0, n) on up to `threads` workers. Tasks are claimed
//! dynamically; each index runs exactly once. The first exception thrown by
//! any task is rethrown after all workers join.
template<class Fn>
void
parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
  const unsigned workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) {
    pool.emplace_back(work);
  }
  work();
  for (auto& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

} // namespace adasmooth
