#pragma once

#include <cstddef>
#include <functional>

namespace hypofbi {

/// Worker count used when a call passes threads <= 0. Starts at the number
/// of logical cores.
int default_threads();
void set_default_threads(int threads);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// executed exactly once and results must be written to per-index slots, so
/// the outcome does not depend on scheduling. If several bodies throw, the
/// exception of the lowest index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

} // namespace hypofbi
