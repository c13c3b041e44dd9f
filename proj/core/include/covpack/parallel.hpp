#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace covpack {

/// Runs fn(i) for every i in [0, count) across up to `threads` workers.
/// Each index is an independent deterministic unit (own RNG substream, own
/// output slot), so the result is identical for every thread count.
inline void parallel_for_indexed(std::uint64_t count, int threads,
                                 const std::function<void(std::uint64_t)>& fn) {
  if (count == 0) return;
  const unsigned workers =
      threads <= 1 ? 1u
                   : static_cast<unsigned>(
                         std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), count));
  if (workers == 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace covpack
