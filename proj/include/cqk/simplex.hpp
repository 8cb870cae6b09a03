#pragma once

// Projection onto the simplex {x >= 0, sum x = r} and the l1 ball.
//
// simplex_init_lambda grows a candidate free set J one index at a time and
// keeps lambda_J = (r - sum_J y) / |J| current after every change; any
// lambda_J bounds the optimal multiplier from above, so every index with
// y_i + lambda_J <= 0 along the way is zero at the solution. Condat's method
// keeps sweeping J with the same Gauss-Seidel update; the Newton variant
// instead iterates on phi from the initializer's lambda, which only ever
// steps downwards with the left derivative.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cqk/core.hpp"
#include "cqk/kernels.hpp"
#include "cqk/newton.hpp"

namespace cqk {

template <std::floating_point T>
struct InitResult {
  T lambda0{};
  std::vector<std::size_t> free;   // J
  std::vector<char> fixed_mask;    // 1 for indices of I proven zero
  // Sum and count of the values that define lambda0 (the contributing set).
  T contrib_sum{};
  std::size_t contrib_count = 0;
};

class EmptyIndexSet : public std::invalid_argument {
 public:
  EmptyIndexSet() : std::invalid_argument("simplex_init_lambda: index set is empty") {}
};

namespace detail {

/// Membership test for the candidate free set. The l1 variant works on |y|
/// and rejects zeros outright: min(|y|, |y| + lambda) > 0.
enum class InitTest { Simplex, L1 };

template <std::floating_point T>
struct InitValues {
  std::span<const T> y;
  InitTest test;

  T value(std::size_t i) const noexcept { return test == InitTest::L1 ? std::abs(y[i]) : y[i]; }
  bool passes(std::size_t i, T lambda) const noexcept {
    const T v = value(i);
    if (test == InitTest::L1) return std::min(v, v + lambda) > 0;
    return v + lambda > 0;
  }
};

/// The initializer over the index sequence `I` (any forward range of
/// indices). With `xbar`, only indices with nonzero xbar update lambda; the
/// others stay candidates while they pass the membership test.
template <std::floating_point T, class IndexRange>
InitResult<T> init_lambda(const InitValues<T>& vals, T r, const IndexRange& I,
                          PrimalHint<T> xbar, std::size_t n_total,
                          bool build_mask = true) {
  constexpr T inf = std::numeric_limits<T>::infinity();
  InitResult<T> res;
  auto it = std::begin(I);
  const auto end = std::end(I);
  if (it == end) throw EmptyIndexSet();

  // The l1 test fixes zero entries outright, so they never seed J.
  if (vals.test == InitTest::L1)
    while (it != end && vals.value(*it) == 0) ++it;
  if (it == end) throw EmptyIndexSet();

  auto contributes = [&](std::size_t i) { return !xbar || (*xbar)[i] != 0; };

  std::vector<std::size_t>& J = res.free;
  std::vector<std::size_t> pool;
  const std::size_t first = *it;
  T sum{};
  std::size_t count = 0;
  T lambda = inf;
  J.push_back(first);
  if (contributes(first)) {
    sum = vals.value(first);
    count = 1;
    lambda = r - sum;
  }

  for (++it; it != end; ++it) {
    const std::size_t j = *it;
    if (!vals.passes(j, lambda)) continue;
    if (!contributes(j)) {
      J.push_back(j);
      continue;
    }
    const T v = vals.value(j);
    const T grown = (r - sum - v) / static_cast<T>(count + 1);
    if (grown < r - v) {
      J.push_back(j);
      sum += v;
      ++count;
      lambda = grown;
    } else {
      pool.insert(pool.end(), J.begin(), J.end());
      J.assign(1, j);
      sum = v;
      count = 1;
      lambda = r - v;
    }
  }

  for (std::size_t j : pool) {
    if (!vals.passes(j, lambda)) continue;
    J.push_back(j);
    if (contributes(j)) {
      const T v = vals.value(j);
      lambda = (r - sum - v) / static_cast<T>(count + 1);
      sum += v;
      ++count;
    }
  }

  if (count == 0) lambda = std::max(r / static_cast<T>(n_total), -vals.value(first));

  res.lambda0 = lambda;
  res.contrib_sum = sum;
  res.contrib_count = count;
  if (build_mask) {
    res.fixed_mask.assign(n_total, 0);
    for (auto i : I) res.fixed_mask[static_cast<std::size_t>(i)] = 1;
    for (std::size_t j : J) res.fixed_mask[j] = 0;
  }
  return res;
}

template <std::floating_point T>
void check_simplex_args(std::span<const T> y, T r) {
  if (y.empty()) throw DomainError("size", DomainError::npos, "instance is empty");
  if (!std::isfinite(r) || !(r > 0)) throw DomainError("r", DomainError::npos, "must be finite and positive");
}

struct IotaRange {
  std::size_t first;
  std::size_t last;
  struct iterator {
    std::size_t v;
    std::size_t operator*() const noexcept { return v; }
    iterator& operator++() noexcept { ++v; return *this; }
    bool operator==(const iterator&) const = default;
  };
  iterator begin() const noexcept { return {first}; }
  iterator end() const noexcept { return {last}; }
};

}  // namespace detail

/// Initial multiplier over the indices I (all of y when I is empty is an
/// error). Returns lambda0 >= lambda* whenever some index contributed.
template <std::floating_point T>
InitResult<T> simplex_init_lambda(std::span<const T> y, T r, std::span<const std::size_t> I,
                                  PrimalHint<T> xbar = {}) {
  if (xbar && xbar->size() != y.size())
    throw DomainError("xbar", DomainError::npos, "length differs from y");
  return detail::init_lambda(detail::InitValues<T>{y, detail::InitTest::Simplex}, r, I, xbar,
                             y.size());
}

template <std::floating_point T>
InitResult<T> simplex_init_lambda(std::span<const T> y, T r,
                                  PrimalHint<T> xbar = {}) {
  if (y.empty()) throw EmptyIndexSet();
  if (xbar && xbar->size() != y.size())
    throw DomainError("xbar", DomainError::npos, "length differs from y");
  return detail::init_lambda(detail::InitValues<T>{y, detail::InitTest::Simplex}, r,
                             detail::IotaRange{0, y.size()}, xbar, y.size());
}

template <std::floating_point T>
struct CondatResult {
  std::vector<T> x;
  T lambda{};
  int sweeps = 0;
};

/// Condat's projection: the initializer followed by Gauss-Seidel sweeps that
/// drop j from J when y_j + lambda <= 0 and update lambda with the new |J|.
template <std::floating_point T>
CondatResult<T> condat_project_full(std::span<const T> y, T r) {
  detail::check_simplex_args(y, r);
  auto init = detail::init_lambda(detail::InitValues<T>{y, detail::InitTest::Simplex}, r,
                                  detail::IotaRange{0, y.size()}, std::optional<std::span<const T>>{}, y.size(), false);
  std::vector<std::size_t>& J = init.free;
  T lambda = init.lambda0;
  CondatResult<T> res;
  bool changed = true;
  while (changed) {
    changed = false;
    ++res.sweeps;
    std::size_t size = J.size();
    std::size_t w = 0;
    for (std::size_t idx = 0; idx < J.size(); ++idx) {
      const std::size_t j = J[idx];
      const T t = y[j] + lambda;
      if (t <= 0 && size > 1) {
        --size;
        lambda += t / static_cast<T>(size);
        changed = true;
      } else {
        J[w++] = j;
      }
    }
    J.resize(w);
  }
  res.lambda = lambda;
  res.x.assign(y.size(), T(0));
  for (std::size_t j : J) res.x[j] = std::max(T(0), y[j] + lambda);
  return res;
}

template <std::floating_point T>
std::vector<T> condat_project(std::span<const T> y, T r) {
  return condat_project_full(y, r).x;
}

namespace detail {

/// The streamlined simplex Newton iteration from lambda0 >= min(-y). Only
/// the first step may use the right derivative; afterwards phi(lambda_k) > r
/// and every step goes down with the left derivative until phi <= r.
template <class Evaluator, class T = typename Evaluator::T>
SolveOutcome<T> run_simplex_newton(Evaluator& ev, T r, T lambda0, const SolverOptions<T>& opts,
                                   std::vector<IterateRecord<T>>* trace = nullptr) {
  check_options(opts);
  constexpr T inf = std::numeric_limits<T>::infinity();
  const T tau = opts.tolerance_scale;
  SolveOutcome<T> out;
  int k = 0;
  T lo = -inf, hi = inf;

  auto finish = [&](T at) {
    out.status = Status::Solved;
    out.lambda = at;
    out.iterations = k;
    out.fixed_count = ev.fixed_count();
    ev.finalize(at, out);
    return out;
  };

  T lambda = lambda0;
  PhiSums<T> s = ev.eval(lambda);
  ++out.phi_evals;
  T g = s.value - r;
  if (trace) trace->push_back({lambda, g, s.dminus, s.dplus});
  if (g == 0) return finish(lambda);

  T step;
  if (g < 0) {
    lo = lambda;
    if (!(s.dplus > 0))
      throw ContractViolation("simplex Newton: lambda0 is below every breakpoint");
    step = -g / s.dplus;
  } else {
    hi = lambda;
    if (ev.fixing()) ev.fix(lambda, FixSide::Lower);
    step = -g / s.dminus;
  }

  for (;;) {
    const T next = lambda + step;
    ++k;
    if (std::abs(step) < tau || next == lambda) return finish(next);
    if (std::isfinite(lo) && std::isfinite(hi) &&
        hi - lo < tau * std::max(std::abs(hi), std::abs(lo)))
      return finish(next);
    lambda = next;
    if (k > opts.max_iterations)
      throw IterationLimitError("simplex Newton iteration limit reached",
                                static_cast<double>(lambda), static_cast<double>(lo),
                                static_cast<double>(hi));

    s = ev.eval(lambda);
    ++out.phi_evals;
    g = s.value - r;
    if (trace) trace->push_back({lambda, g, s.dminus, s.dplus});
    if (g <= 0) return finish(lambda);
    hi = lambda;
    if (ev.fixing()) ev.fix(lambda, FixSide::Lower);
    if (!(s.dminus > 0))
      throw ContractViolation("simplex Newton: vanishing left derivative above the root");
    step = -g / s.dminus;
  }
}

}  // namespace detail

/// Projection onto the r-simplex by the specialized Newton method, started
/// from simplex_init_lambda (warm-started by the support of xbar if given).
template <std::floating_point T>
SolveOutcome<T> newton_project_simplex(std::span<const T> y, T r, const SolverOptions<T>& opts = {},
                                       PrimalHint<T> xbar = {}) {
  detail::check_simplex_args(y, r);
  if (xbar && xbar->size() != y.size())
    throw DomainError("xbar", DomainError::npos, "length differs from y");
  const SimplexKernel<T> kernel{y};
  auto init = detail::init_lambda(detail::InitValues<T>{y, detail::InitTest::Simplex}, r,
                                  detail::IotaRange{0, y.size()}, xbar, y.size(), false);
  if (opts.variable_fixing) {
    detail::ActiveSetEvaluator<SimplexKernel<T>> ev(kernel, r, opts.output, true, std::move(init.free));
    return detail::run_simplex_newton(ev, r, init.lambda0, opts);
  }
  detail::FullMapEvaluator<SimplexKernel<T>> ev(kernel, r, opts.output, 1);
  return detail::run_simplex_newton(ev, r, init.lambda0, opts);
}

/// Newton from a caller-provided lambda0, raised to min(-y) if below it.
/// Records every iterate in `trace` when given.
template <std::floating_point T>
SolveOutcome<T> newton_project_simplex_from(std::span<const T> y, T r, T lambda0,
                                            const SolverOptions<T>& opts = {},
                                            std::vector<detail::IterateRecord<T>>* trace = nullptr) {
  detail::check_simplex_args(y, r);
  T ymin = -y[0];
  for (T v : y) ymin = std::min(ymin, -v);
  lambda0 = std::max(lambda0, ymin);
  const SimplexKernel<T> kernel{y};
  if (opts.variable_fixing) {
    detail::ActiveSetEvaluator<SimplexKernel<T>> ev(kernel, r, opts.output, true);
    return detail::run_simplex_newton(ev, r, lambda0, opts, trace);
  }
  detail::FullMapEvaluator<SimplexKernel<T>> ev(kernel, r, opts.output, 1);
  return detail::run_simplex_newton(ev, r, lambda0, opts, trace);
}

/// Projection onto {x : |x|_1 <= r}. Points inside the ball are returned
/// unchanged; otherwise |y| is projected onto the r-simplex and the signs of
/// y are restored. Zero entries of y are fixed before any iteration.
template <std::floating_point T>
SolveOutcome<T> project_l1(std::span<const T> y, T r, const SolverOptions<T>& opts = {},
                           PrimalHint<T> xbar = {}) {
  detail::check_simplex_args(y, r);
  if (xbar && xbar->size() != y.size())
    throw DomainError("xbar", DomainError::npos, "length differs from y");

  T norm1{};
  for (T v : y) norm1 += std::abs(v);
  SolveOutcome<T> out;
  out.n = y.size();
  out.output = opts.output;
  if (norm1 <= r) {
    out.lambda = T(0);
    if (opts.output == OutputKind::Dense) {
      out.x.assign(y.begin(), y.end());
    } else {
      for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] != 0) out.x_sparse.push_back({i, y[i]});
    }
    return out;
  }

  std::vector<T> mag(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) mag[i] = std::abs(y[i]);
  const SimplexKernel<T> kernel{std::span<const T>(mag)};
  auto init = detail::init_lambda(detail::InitValues<T>{y, detail::InitTest::L1}, r,
                                  detail::IotaRange{0, y.size()}, xbar, y.size(), false);
  if (opts.variable_fixing) {
    detail::ActiveSetEvaluator<SimplexKernel<T>> ev(kernel, r, opts.output, true, std::move(init.free));
    out = detail::run_simplex_newton(ev, r, init.lambda0, opts);
  } else {
    detail::FullMapEvaluator<SimplexKernel<T>> ev(kernel, r, opts.output, 1);
    out = detail::run_simplex_newton(ev, r, init.lambda0, opts);
  }
  if (out.output == OutputKind::Dense) {
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] < 0 && out.x[i] != 0) out.x[i] = -out.x[i];
  } else {
    for (auto& e : out.x_sparse)
      if (y[e.index] < 0) e.value = -e.value;
  }
  return out;
}

}  // namespace cqk
