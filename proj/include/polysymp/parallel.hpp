#pragma once

// Deterministic work splitting for the verification sweeps. Each index of a
// parallel_for gets its own preallocated output slot, so results do not
// depend on scheduling; POLYSYMP_THREADS caps the worker count.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace polysymp {

inline int thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap <= 0) cap = 1;
  if (const char* env = std::getenv("POLYSYMP_THREADS")) {
    try {
      const int requested = std::stoi(env);
      if (requested >= 1) cap = std::min(cap, requested);
    } catch (...) {
      // Unparseable values fall back to the hardware count.
    }
  }
  return cap;
}

// Runs body(i) for i in [0, count) on up to thread_cap() workers, splitting
// the range into contiguous chunks. The body must only write to state owned
// by index i.
inline void parallel_for(int count, const std::function<void(int)>& body) {
  if (count <= 0) return;
  const int workers = std::min(thread_cap(), count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace polysymp
