#pragma once

// Index-parallel loop over independent work items. Results are written by index
// so the outcome does not depend on scheduling. Thread count comes from the
// CONENAV_THREADS environment variable (default: hardware concurrency).

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace conenav {

inline int thread_count() {
  if (const char* env = std::getenv("CONENAV_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count). If any call throws, the exception of the
/// lowest failing index is rethrown after all workers finish.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int threads = 0) {
  const auto n_threads = static_cast<std::size_t>(std::max(1, threads > 0 ? threads : thread_count()));
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex mu;
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  };
  if (n_threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(n_threads, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace conenav
