#pragma once

// Map/reduce kernels shared by the solvers. Every kernel exists as a serial
// reference loop; the omp_* variants split the same loop into contiguous
// blocks and combine block partials in a fixed pairwise order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cqk/core.hpp"

namespace cqk {

enum class Direction { Right, Left };

/// Which bound a fixing pass clamps to: Lower when phi(lambda) > r.
enum class FixSide { Lower, Upper };

// ---------------------------------------------------------------------------
// Element policies. A policy answers every per-variable question the solvers
// ask, so that the same drivers run the general problem and the simplex.

template <std::floating_point T>
struct KnapsackKernel {
  using value_type = T;
  const Instance<T>* inst;

  std::size_t size() const noexcept { return inst->size(); }

  void accumulate(PhiSums<T>& s, std::size_t i, T lambda) const noexcept {
    accumulate_element(s, inst->d[i], inst->a[i], inst->b[i], inst->l[i], inst->u[i], lambda);
  }
  T x(std::size_t i, T lambda) const noexcept {
    return element_x(inst->d[i], inst->a[i], inst->b[i], inst->l[i], inst->u[i], lambda);
  }
  T lower_bp(std::size_t i) const noexcept {
    return lower_breakpoint(inst->d[i], inst->a[i], inst->b[i], inst->l[i]);
  }
  T upper_bp(std::size_t i) const noexcept {
    return upper_breakpoint(inst->d[i], inst->a[i], inst->b[i], inst->u[i]);
  }
  /// Returns the bound i is fixed to at lambda on the given side, if fixable.
  std::optional<T> fixable(std::size_t i, T lambda, FixSide side) const noexcept {
    if (side == FixSide::Lower) {
      if (std::isfinite(inst->l[i]) && lambda <= lower_bp(i)) return inst->l[i];
    } else {
      if (std::isfinite(inst->u[i]) && lambda >= upper_bp(i)) return inst->u[i];
    }
    return std::nullopt;
  }
  T weight(std::size_t i) const noexcept { return inst->b[i]; }
};

/// d = b = 1, a = y, l = 0, u = inf.
template <std::floating_point T>
struct SimplexKernel {
  using value_type = T;
  std::span<const T> y;

  std::size_t size() const noexcept { return y.size(); }

  void accumulate(PhiSums<T>& s, std::size_t i, T lambda) const noexcept {
    accumulate_simplex(s, y[i], lambda);
  }
  T x(std::size_t i, T lambda) const noexcept { return std::max(T(0), y[i] + lambda); }
  T lower_bp(std::size_t i) const noexcept { return -y[i]; }
  T upper_bp(std::size_t) const noexcept { return std::numeric_limits<T>::infinity(); }
  std::optional<T> fixable(std::size_t i, T lambda, FixSide side) const noexcept {
    if (side == FixSide::Lower && y[i] + lambda <= 0) return T(0);
    return std::nullopt;
  }
  T weight(std::size_t) const noexcept { return T(1); }
};

// ---------------------------------------------------------------------------
// Reductions

/// Sums partials pairwise in a fixed tree order.
template <class Acc>
Acc tree_sum(std::vector<Acc> parts) {
  if (parts.empty()) return Acc{};
  std::size_t m = parts.size();
  while (m > 1) {
    const std::size_t half = m / 2;
    for (std::size_t i = 0; i < half; ++i) parts[i] = parts[2 * i] + parts[2 * i + 1];
    if (m % 2 == 1) parts[half] = parts[m - 1];
    m = half + m % 2;
  }
  return parts[0];
}

struct BlockRange {
  std::size_t begin;
  std::size_t end;
};

/// Contiguous equal-size split of [0, n) into `blocks` ranges.
inline BlockRange block_range(std::size_t n, std::size_t blocks, std::size_t k) noexcept {
  const std::size_t base = n / blocks;
  const std::size_t extra = n % blocks;
  const std::size_t begin = k * base + std::min(k, extra);
  return {begin, begin + base + (k < extra ? 1 : 0)};
}

inline int clamp_workers(int workers, std::size_t n) noexcept {
  if (workers < 1) return 1;
  if (n < static_cast<std::size_t>(workers)) return static_cast<int>(std::max<std::size_t>(n, 1));
  return workers;
}

/// Reduces body(acc, begin, end) over `workers` contiguous blocks of [0, n),
/// one block per thread, combining partials with tree_sum.
template <class Acc, class Body>
Acc omp_block_reduce(std::size_t n, int workers, Body&& body) {
  workers = clamp_workers(workers, n);
  if (workers == 1) {
    Acc acc{};
    body(acc, std::size_t{0}, n);
    return acc;
  }
  std::vector<Acc> parts(static_cast<std::size_t>(workers));
#pragma omp parallel for num_threads(workers) schedule(static, 1)
  for (int k = 0; k < workers; ++k) {
    const auto r = block_range(n, static_cast<std::size_t>(workers), static_cast<std::size_t>(k));
    body(parts[static_cast<std::size_t>(k)], r.begin, r.end);
  }
  return tree_sum(std::move(parts));
}

/// Elementwise map over [0, n), statically partitioned.
template <class Body>
void omp_block_map(std::size_t n, int workers, Body&& body) {
  workers = clamp_workers(workers, n);
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
#pragma omp parallel for num_threads(workers) schedule(static, 1)
  for (int k = 0; k < workers; ++k) {
    const auto r = block_range(n, static_cast<std::size_t>(workers), static_cast<std::size_t>(k));
    body(r.begin, r.end);
  }
}

// ---------------------------------------------------------------------------
// Serial reference kernels

namespace serial {

template <class Kernel, class T = typename Kernel::value_type>
PhiSums<T> phi_range(const Kernel& k, T lambda, std::size_t begin, std::size_t end) {
  PhiSums<T> s;
  for (std::size_t i = begin; i < end; ++i) k.accumulate(s, i, lambda);
  return s;
}

template <class Kernel, class T = typename Kernel::value_type>
PhiSums<T> phi_indices(const Kernel& k, T lambda, std::span<const std::size_t> idx) {
  PhiSums<T> s;
  for (std::size_t i : idx) k.accumulate(s, i, lambda);
  return s;
}

/// Nearest breakpoint of the listed variables strictly beyond `from`.
template <class Kernel, class T = typename Kernel::value_type>
std::optional<T> nearest_breakpoint(const Kernel& k, std::span<const std::size_t> idx,
                                    T from, Direction dir) {
  constexpr T inf = std::numeric_limits<T>::infinity();
  T best = dir == Direction::Right ? inf : -inf;
  for (std::size_t i : idx) {
    for (T bp : {k.lower_bp(i), k.upper_bp(i)}) {
      if (!std::isfinite(bp)) continue;
      if (dir == Direction::Right) {
        if (bp > from && bp < best) best = bp;
      } else {
        if (bp < from && bp > best) best = bp;
      }
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

/// Totals of a fixing pass over one index list.
template <std::floating_point T>
struct FixTally {
  T rhs{};        // sum of b_i * bound_i
  T scale{};      // sum of |b_i * bound_i|
  std::size_t count = 0;
};

/// Removes fixable indices from `idx` in place (order-preserving compaction),
/// writing bound values to `dense` when non-empty and recording nonzero
/// bound values in `nonzero`.
template <class Kernel, class T = typename Kernel::value_type>
FixTally<T> fix_indices(const Kernel& k, std::vector<std::size_t>& idx, T lambda, FixSide side,
                        std::span<T> dense, std::vector<IndexedValue<T>>& nonzero) {
  FixTally<T> tally;
  std::size_t w = 0;
  for (std::size_t i : idx) {
    const auto bound = k.fixable(i, lambda, side);
    if (!bound) {
      idx[w++] = i;
      continue;
    }
    const T contrib = k.weight(i) * *bound;
    tally.rhs += contrib;
    tally.scale += std::abs(contrib);
    ++tally.count;
    if (!dense.empty())
      dense[i] = *bound;
    else if (*bound != 0)
      nonzero.push_back({i, *bound});
  }
  idx.resize(w);
  return tally;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP kernels over the full range

namespace omp_par {

template <class Kernel, class T = typename Kernel::value_type>
PhiSums<T> phi_full(const Kernel& k, T lambda, int workers) {
  return omp_block_reduce<PhiSums<T>>(k.size(), workers,
                                      [&](PhiSums<T>& acc, std::size_t b, std::size_t e) {
                                        acc = serial::phi_range(k, lambda, b, e);
                                      });
}

/// Same map with an OpenMP reduction clause; summation order is unspecified.
template <class Kernel, class T = typename Kernel::value_type>
PhiSums<T> phi_full_unordered(const Kernel& k, T lambda, int workers) {
  const std::size_t n = k.size();
  workers = clamp_workers(workers, n);
  T value{}, dminus{}, dplus{}, scale{};
#pragma omp parallel for num_threads(workers) schedule(static) \
    reduction(+ : value, dminus, dplus, scale)
  for (std::size_t i = 0; i < n; ++i) {
    PhiSums<T> s;
    k.accumulate(s, i, lambda);
    value += s.value;
    dminus += s.dminus;
    dplus += s.dplus;
    scale += s.scale;
  }
  return {value, dminus, dplus, scale};
}

template <std::floating_point T>
struct MinAcc {
  T value = std::numeric_limits<T>::infinity();
  MinAcc operator+(const MinAcc& o) const noexcept { return {std::min(value, o.value)}; }
};

/// Nearest breakpoint over all variables. The left search runs on negated
/// breakpoints so that both directions reduce with min.
template <class Kernel, class T = typename Kernel::value_type>
std::optional<T> nearest_breakpoint_full(const Kernel& k, T from, Direction dir, int workers) {
  const T sign = dir == Direction::Right ? T(1) : T(-1);
  const T start = sign * from;
  auto best = omp_block_reduce<MinAcc<T>>(
      k.size(), workers, [&](MinAcc<T>& acc, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          for (T bp : {k.lower_bp(i), k.upper_bp(i)}) {
            if (!std::isfinite(bp)) continue;
            const T v = sign * bp;
            if (v > start && v < acc.value) acc.value = v;
          }
        }
      });
  if (!std::isfinite(best.value)) return std::nullopt;
  return sign * best.value;
}

}  // namespace omp_par

}  // namespace cqk
