#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace nlcf {

// thread budget: NLCF_THREADS env var, default 1 (results are identical for
// any thread count: fixed chunk partition, outputs written to disjoint slots)
inline int thread_budget() {
  if (const char* s = std::getenv("NLCF_THREADS")) {
    int n = std::atoi(s);
    if (n >= 1) return n;
  }
  return 1;
}

template <class F>
void parallel_for(std::size_t n, const F& body, int threads = 0) {
  if (threads <= 0) threads = thread_budget();
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += nt) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace nlcf
