#pragma once

#include <cstddef>
#include <functional>

namespace emrelax {

/// Worker count from EMRELAX_THREADS (default: hardware concurrency, at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Callers write
/// results into per-index slots and reduce afterwards in index order, so the
/// outcome does not depend on the thread count. The first exception thrown by
/// any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace emrelax
