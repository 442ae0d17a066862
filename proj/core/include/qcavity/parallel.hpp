#pragma once

#include <cstddef>
#include <functional>

namespace qcavity {

/// Worker count for data-parallel loops: the QCAVITY_THREADS environment
/// variable when set (clamped to >= 1), otherwise hardware concurrency.
int worker_count();

/// Runs fn(chunk) for every chunk in [0, n_chunks) across the worker pool.
/// Chunk boundaries are chosen by the caller and do not depend on the worker
/// count, so per-chunk partial results can be reduced in chunk order to give
/// bit-identical totals for any number of workers. fn must not throw across
/// chunks it does not own; the first exception is rethrown on the caller.
void parallel_for_chunks(std::size_t n_chunks, const std::function<void(std::size_t)>& fn);

} // namespace qcavity
