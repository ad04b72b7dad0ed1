#pragma once

#include <cstddef>
#include <functional>

namespace hicrit {

/// Process-wide cap on worker threads for Monte Carlo loops. Zero means
/// "use every available core".
void set_thread_limit(unsigned threads);
unsigned thread_limit();

/// Runs body(i) for i in [0, count) across up to thread_limit() workers.
/// Work items are claimed dynamically; callers write results by index so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// item is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hicrit
