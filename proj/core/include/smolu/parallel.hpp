#pragma once

#include <cstddef>
#include <functional>

namespace smolu {

// Worker count used by parallel_for. 0 restores the hardware default.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls body(i) for i in [0, n). Indices are split into contiguous blocks,
// so any per-index output written by body is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace smolu
