#pragma once

#include <cstddef>
#include <functional>

namespace kmeasure::parallel {

// Process-wide cap on worker threads. Work is always split into a fixed
// number of tasks independent of this cap, so results never depend on it.
void set_thread_limit(std::size_t n);
std::size_t thread_limit();

// Runs task(k) for k in [0, n_tasks). Tasks must write to disjoint outputs.
void for_each_task(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

}  // namespace kmeasure::parallel
