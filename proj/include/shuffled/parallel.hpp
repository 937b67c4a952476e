#pragma once

#include <cstddef>
#include <functional>

namespace shuffled {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency; 0 restores the default.
void set_worker_count(std::size_t workers);
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on a pool of workers that pull indices
/// from a shared counter. Calls made from inside a worker run inline, so
/// nested loops never oversubscribe. The first exception thrown by any body
/// is rethrown after all workers finish.
///
/// Results must be written to per-index slots; the schedule is not
/// deterministic, only the per-index work is.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace shuffled
