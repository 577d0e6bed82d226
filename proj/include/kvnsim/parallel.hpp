#pragma once

#include <cstddef>
#include <functional>

namespace kvnsim {

// Upper bound on worker threads used by field-wise loops. 0 selects the
// hardware concurrency. Results do not depend on this setting: every row or
// column is always processed by the same code on the same data.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Splits [0, count) into contiguous chunks and runs body(begin, end) on each.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace kvnsim
