#pragma once

#include <cstddef>
#include <functional>

namespace mtd {

/// Worker count: MTD_NUM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items are
/// claimed dynamically, so fn must write only to item-private state; callers
/// reduce afterwards in index order to stay reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace mtd
