#include "kmeasure/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kmeasure::parallel {

namespace {
std::atomic<std::size_t> g_thread_limit{1};
}

void set_thread_limit(std::size_t n) { g_thread_limit.store(std::max<std::size_t>(n, 1)); }

std::size_t thread_limit() { return g_thread_limit.load(); }

void for_each_task(std::size_t n_tasks, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min(thread_limit(), n_tasks);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n_tasks; ++k) task(k);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n_tasks) return;
      try {
        task(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kmeasure::parallel
