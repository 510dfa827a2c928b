#pragma once

#include <cstddef>
#include <functional>

namespace lorentz {

/// Number of worker threads: hardware concurrency, capped by the
/// LORENTZ_THREADS environment variable when it is set.
unsigned worker_count();

/// Split [0, n) into contiguous chunks and run `body(begin, end)` on a pool
/// of worker_count() threads. Callers must combine results in a way that
/// does not depend on which thread ran which chunk (per-index slots or
/// integer sums), which keeps every estimate independent of thread count.
/// The first exception thrown by a chunk is rethrown on the calling thread.
void parallel_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                     std::size_t grain = 0);

}  // namespace lorentz
