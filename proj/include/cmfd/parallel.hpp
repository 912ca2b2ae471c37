#ifndef CMFD_PARALLEL_HPP
#define CMFD_PARALLEL_HPP

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cmfd {

// Resolves a --jobs value: 0 falls back to the CMFD_JOBS environment
// variable, then to 1. Outputs never depend on the job count; it only
// controls how index-addressed work is chunked.
inline int resolve_jobs(int requested) {
  int jobs = requested;
  if (jobs <= 0) {
    if (const char* env = std::getenv("CMFD_JOBS")) jobs = std::atoi(env);
  }
  if (jobs <= 0) jobs = 1;
  if (jobs > 256) jobs = 256;
  return jobs;
}

// Runs fn(i) for i in [0, n). Each worker owns a contiguous index range, so
// writes into per-index slots are race-free and results are independent of
// the job count.
template <typename Fn>
void parallel_for(std::int64_t n, int jobs, Fn&& fn) {
  if (n <= 0) return;
  jobs = resolve_jobs(jobs);
  if (jobs == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (jobs > n) jobs = static_cast<int>(n);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  const std::int64_t chunk = (n + jobs - 1) / jobs;
  for (int t = 0; t < jobs; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace cmfd

#endif  // CMFD_PARALLEL_HPP
