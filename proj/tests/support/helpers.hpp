#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cqk/core.hpp"
#include "cqk/instances.hpp"

namespace testutil {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline cqk::Instance<double> two_var() {
  return {{1, 2}, {0, 0}, {1, 1}, {0, 0}, {1, 1}, 1.0};
}

/// Simplex data as a knapsack instance.
inline cqk::Instance<double> simplex_as_cqk(std::vector<double> y, double r) {
  return cqk::as_knapsack(cqk::SimplexInstance<double>{std::move(y), r});
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Small random instance with a mix of finite and infinite bounds, equal
/// bounds and breakpoint ties, for property tests.
inline cqk::Instance<double> random_mixed(std::uint64_t seed, std::size_t n) {
  cqk::Xoshiro256pp rng(seed);
  cqk::Instance<double> in;
  for (std::size_t i = 0; i < n; ++i) {
    in.d.push_back(std::round(rng.uniform(1, 5)));
    in.b.push_back(std::round(rng.uniform(1, 4)));
    in.a.push_back(std::round(rng.uniform(-5, 5)));
    double p = std::round(rng.uniform(-4, 4)), q = std::round(rng.uniform(-4, 4));
    double lo = std::min(p, q), hi = std::max(p, q);
    const double kind = rng.uniform();
    if (kind < 0.1) lo = -kInf;
    else if (kind < 0.2) hi = kInf;
    in.l.push_back(lo);
    in.u.push_back(hi);
  }
  double btl = 0, btu = 0;
  for (std::size_t i = 0; i < n; ++i) {
    btl += std::isfinite(in.l[i]) ? in.b[i] * in.l[i] : -10;
    btu += std::isfinite(in.u[i]) ? in.b[i] * in.u[i] : 10;
  }
  in.r = std::round(rng.uniform(btl, btu));
  return in;
}

}  // namespace testutil
