#pragma once

#include <cstddef>
#include <functional>

namespace mwi {

/// Worker cap from MWI_THREADS (unset or 0: hardware concurrency).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; the first exception thrown by any body is rethrown
/// after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mwi
