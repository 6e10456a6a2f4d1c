#pragma once

#include <cstddef>
#include <functional>

namespace molldeconv {

/// Worker cap: MOLLDECONV_THREADS when set to a positive integer, else hardware concurrency.
std::size_t thread_limit();

/// Runs body(i) for i in [0, count). Iterations must write disjoint outputs; results do not
/// depend on the number of workers. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace molldeconv
