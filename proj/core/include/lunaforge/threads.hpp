#pragma once

#include <cstddef>
#include <functional>

namespace lunaforge {

/// Worker count: LUNAFORGE_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; callers own the ordering of any shared writes. The first
/// exception thrown by a worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = default_thread_count());

}  // namespace lunaforge
