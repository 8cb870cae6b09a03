#pragma once

// Benchmark timing: one untimed warm-up call, then repeated timed calls until
// a run count or time budget is exhausted; the minimum is kept.

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cqk {

struct TimingBudget {
  int max_runs = 10000;
  double max_seconds = 2.0;
};

/// Minimum wall time of fn() in milliseconds, measured on a monotonic clock.
template <class F>
double min_time_ms(F&& fn, const TimingBudget& budget = {}) {
  using clock = std::chrono::steady_clock;
  fn();
  double best = std::numeric_limits<double>::infinity();
  const auto start = clock::now();
  for (int run = 0; run < std::max(1, budget.max_runs); ++run) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (std::chrono::duration<double>(t1 - start).count() >= budget.max_seconds) break;
  }
  return best;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  return (*std::max_element(v.begin(), v.begin() + mid) + hi) / 2;
}

}  // namespace cqk
