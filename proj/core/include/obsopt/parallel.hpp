#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace obsopt {

//! Number of worker threads to use when the caller passes 0.
inline std::size_t default_threads()
{
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

//! Runs body(i) for i in [0, count) on up to `threads` threads. Work items
//! are handed out dynamically, so body must write its result to a slot owned
//! by i; the first exception thrown (lowest index) is rethrown on the caller.
template<typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body)
{
  if (threads == 0)
    threads = default_threads();
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }

  std::atomic<std::size_t> next{ 0 };
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = count;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool)
    th.join();
  if (error)
    std::rethrow_exception(error);
}

} // namespace obsopt
