#pragma once

#include <cstddef>
#include <functional>

namespace photonstat {

/// Worker count: PHOTONSTAT_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned thread_count();

/// Calls task(i) for i in [0, n) on up to thread_count() threads. Tasks must
/// write only to their own slot; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace photonstat
