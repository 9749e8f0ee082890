#pragma once

#include <cstddef>
#include <functional>

namespace vgf {

/// Worker count: VGF_THREADS if set, otherwise the hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Results must be
/// written to per-index storage; the schedule never affects values.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vgf
