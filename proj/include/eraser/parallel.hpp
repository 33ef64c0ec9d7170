#pragma once

#include <cstddef>
#include <functional>

namespace eraser {

/// Worker threads available to the engine: hardware concurrency, capped by
/// the ERASER_SIM_THREADS environment variable when it holds a positive integer.
std::size_t worker_count();

/// Runs body(begin, end) over [0, n_items) in fixed chunks of `chunk` items.
///
/// Chunk boundaries depend only on n_items and chunk, never on the number of
/// threads, so per-chunk results are identical for any worker count. The first
/// exception thrown by a chunk is rethrown after all workers finish.
void parallel_chunks(std::size_t n_items, std::size_t chunk, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace eraser
