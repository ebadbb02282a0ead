#pragma once

#include <cstddef>
#include <functional>

namespace chainrec {

// Worker count used by the data-parallel loops. 0 selects the hardware count.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls body(begin, end) on disjoint chunks covering [0, n). Results must be
// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace chainrec
