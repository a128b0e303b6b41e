#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ensconv {

/// Worker count used by the library: the last value passed to
/// set_thread_count, else ENSCONV_THREADS, else the hardware concurrency.
unsigned thread_count();

/// 0 restores the default resolution.
void set_thread_count(unsigned threads);

/// Calls fn(i) for i in [0, n) on up to thread_count() workers. Work is split
/// into static interleaved slices; fn must write only to slot i of its outputs.
/// The first exception thrown by any call is rethrown on the caller's thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ensconv
