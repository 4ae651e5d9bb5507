#pragma once

#include <cstddef>
#include <functional>

namespace qpspec {

// Worker count from QPSPEC_THREADS, defaulting to the OpenMP default.
int thread_count();

// Runs body(i) for i in [0, n). Results must be written to slot i only, so the
// outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qpspec
