#pragma once

#include <functional>

namespace stokes {

// Worker count from STOKES_LAB_THREADS (default: hardware concurrency).
int worker_count();

// Runs body(k) for k in [0, n). Work is split into contiguous blocks; the
// caller is responsible for making results independent of the split.
void parallel_for(long n, const std::function<void(long)>& body);

}  // namespace stokes
