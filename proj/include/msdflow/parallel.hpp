#pragma once

#include <cstddef>
#include <functional>

namespace msdflow {

// Process-wide worker count for parallel sweeps; 0 means hardware default.
// Overridable via the MSDFLOW_THREADS environment variable or --threads.
void set_thread_count(unsigned n);
unsigned thread_count();

// Splits [0, count) into contiguous chunks across the configured workers.
// Falls back to a serial loop for small ranges.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace msdflow
