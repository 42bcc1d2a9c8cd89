#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace capvton::eval {

// Runs fn(worker, i) for i in [0, n) on up to `workers` threads; items are
// claimed in order from a shared counter. The first exception escaping fn is
// rethrown after the join.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const int count = static_cast<int>(std::clamp<std::size_t>(workers < 1 ? 1 : workers, 1, n ? n : 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&](int w) {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(w, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (count == 1) {
    loop(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < count; ++w) threads.emplace_back(loop, w);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace capvton::eval
