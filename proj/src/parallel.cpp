#include "stokes/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace stokes {

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("STOKES_LAB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) return std::min(cap, hw);
    } catch (...) {
    }
  }
  return hw;
}

void parallel_for(long n, const std::function<void(long)>& body) {
  const int workers = static_cast<int>(std::min<long>(worker_count(), n));
  if (workers <= 1) {
    for (long k = 0; k < n; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  const long block = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long lo = w * block, hi = std::min(n, lo + block);
    pool.emplace_back([lo, hi, &body] {
      for (long k = lo; k < hi; ++k) body(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace stokes
