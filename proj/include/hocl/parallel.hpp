#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace hocl {

/// Run f(0), ..., f(n-1) on up to `workers` threads. Tasks must be pure with
/// respect to shared state (each writes only its own output slot), which
/// makes the result independent of scheduling and worker count. Exceptions
/// are captured and the first one rethrown after all threads join.
template <typename F>
void parallel_for_indexed(int workers, int n, F&& f) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  const int w = workers < n ? workers : n;
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hocl
