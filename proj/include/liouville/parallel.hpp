#pragma once

#include <cstddef>
#include <functional>

namespace liouville {

// Worker count: LIOUVILLE_THREADS if set, else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker,
// so writes into per-index slots are deterministic regardless of thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Sum in a fixed pairwise tree over the given order.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace liouville
