#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace hjdc {

/// Worker count from HJDC_THREADS, falling back to 1.
inline int default_threads() {
  if (const char* env = std::getenv("HJDC_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return 1;
}

/// Runs fn(task) for task in [0, n_tasks) on up to `threads` workers.
/// Tasks are assigned round-robin; callers write results into per-task slots
/// and reduce afterwards in task order, so output never depends on `threads`.
template <class Fn>
void parallel_tasks(int n_tasks, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n_tasks));
  if (threads == 1) {
    for (int t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int t = w; t < n_tasks; t += threads) fn(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hjdc
