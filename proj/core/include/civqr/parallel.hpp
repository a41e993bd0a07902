#pragma once

#include <cstddef>
#include <functional>

namespace civqr {

// Number of workers to use when the caller passed 0: the CIVQR_THREADS
// environment variable if set, otherwise the hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Runs fn(i) for every i in [0, n) on up to n_threads workers.  Indices are
// handed out dynamically; fn must confine its writes to per-index slots.
// Exceptions thrown by fn are rethrown on the calling thread (the one with
// the smallest index wins when several fail).
void parallel_for(std::size_t n, unsigned n_threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace civqr
