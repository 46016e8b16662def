#pragma once

#include <cstddef>
#include <functional>

namespace sdfield {

// Worker count used by parallel passes. Defaults to SDFIELD_THREADS if set,
// otherwise the hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are written
// to disjoint outputs by callers, so results never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  bool parallel = true);

}  // namespace sdfield
