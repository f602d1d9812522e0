#pragma once

#include <cstddef>
#include <functional>

namespace cardio {

/// Number of worker threads to use when the caller passes 0.
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers.
///
/// Work is handed out in contiguous static blocks, and body must only write
/// to state owned by index i, so results never depend on the thread count.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace cardio
