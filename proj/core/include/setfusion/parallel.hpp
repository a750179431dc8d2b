#pragma once

#include <cstddef>
#include <functional>

namespace setfusion {

/// Worker count for parallel loops. Read once from SETFUSION_THREADS,
/// falling back to the hardware concurrency.
std::size_t thread_count();

/// Overrides the worker count for the rest of the process (0 restores the default).
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, count). Each index is visited exactly once and
/// bodies must not share mutable state; the result is then schedule-independent.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace setfusion
