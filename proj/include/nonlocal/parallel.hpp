#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace nonlocal {

// Worker count for data-parallel loops.  NONLOCAL_RELAX_THREADS caps it;
// unset or invalid values fall back to the hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("NONLOCAL_RELAX_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
  }
  return hw;
}

// Runs fn(k) for k in [0, count).  Iterations must write disjoint state;
// the partition of indices is fixed, so results do not depend on the
// number of workers.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  unsigned workers = worker_count();
  if (workers <= 1 || count < 2 * workers) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t k = begin; k < end; ++k) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

// Fixed-tree pairwise reduction.  The summation tree depends only on the
// term count, which keeps results reproducible run to run and is more
// accurate than a left fold on long series.
inline double pairwise_sum(std::span<const double> terms) {
  const std::size_t n = terms.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = terms[0];
    for (std::size_t k = 1; k < n; ++k) s += terms[k];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

}  // namespace nonlocal
