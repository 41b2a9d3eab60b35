#pragma once

#include <cstddef>
#include <functional>

namespace nqe {

// Process-wide worker bound for embarrassingly parallel loops. 0 = hardware
// concurrency. Results are independent of the worker count: every index
// writes only its own slot.
void set_worker_count(int n);
int worker_count();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nqe
