#pragma once

// Globally convergent semismooth Newton method for phi(lambda) = r.
//
// Each iteration evaluates phi and its lateral derivatives at lambda_k,
// shrinks the bracket [lo, hi] around the root, optionally fixes variables
// that are provably at a bound, and then takes one of
//   * a Newton step with the lateral derivative pointing towards the root,
//   * a secant step through the bracket ends when Newton leaves the bracket,
//   * a jump to the nearest breakpoint when that derivative vanishes.
// A missing breakpoint in the required direction proves infeasibility.
//
// The driver is written against an evaluator so that the serial reference,
// the chunked parallel solver and the fixing-free map/reduce solver share the
// exact same multiplier logic.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqk/core.hpp"
#include "cqk/kernels.hpp"

namespace cqk {

/// Zero of the affine interpolant through (lo, phi_lo) and (hi, phi_hi).
template <std::floating_point T>
T secant_step(T lo, T phi_lo, T hi, T phi_hi, T r) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw ContractViolation("secant_step: bracket must be finite with lo < hi");
  if (!(phi_lo < r && r < phi_hi))
    throw ContractViolation("secant_step: requires phi(lo) < r < phi(hi)");
  return lo + (r - phi_lo) * (hi - lo) / (phi_hi - phi_lo);
}

template <std::floating_point T>
struct SolveState {
  std::vector<std::size_t> active;
  T r_residual{};   // r minus the contributions of fixed variables
  T fixed_rhs{};    // sum of b_i * bound_i over fixed variables
  T fixed_scale{};  // sum of |b_i * bound_i| over fixed variables
  std::size_t fixed_count = 0;
  T bracket_lo = -std::numeric_limits<T>::infinity();
  T bracket_hi = std::numeric_limits<T>::infinity();
  T lambda{};
  std::optional<T> last_lambda;
  std::vector<T> x_dense;                     // bounds of fixed variables, dense mode
  std::vector<IndexedValue<T>> fixed_nonzero; // nonzero fixed values, sparse mode

  static SolveState start(std::size_t n, T r, OutputKind output) {
    SolveState s;
    s.active.resize(n);
    std::iota(s.active.begin(), s.active.end(), std::size_t{0});
    s.r_residual = r;
    if (output == OutputKind::Dense) s.x_dense.assign(n, T(0));
    return s;
  }
};

template <std::floating_point T>
std::optional<T> nearest_breakpoint(const SolveState<T>& state, const Instance<T>& inst,
                                    Direction dir) {
  const T from = dir == Direction::Right ? state.bracket_lo : state.bracket_hi;
  if (!std::isfinite(from))
    throw ContractViolation("nearest_breakpoint: the bracket end it starts from is infinite");
  return serial::nearest_breakpoint(KnapsackKernel<T>{&inst}, std::span<const std::size_t>(state.active),
                                    from, dir);
}

/// Fixes active variables at the bound implied by the sign of phi(lambda) - r,
/// where phi_value and r refer to the reduced problem of `state`.
template <std::floating_point T>
void fix_variables(SolveState<T>& state, const Instance<T>& inst, T lambda, T phi_value, T r) {
  if (phi_value == r) return;
  const FixSide side = phi_value > r ? FixSide::Lower : FixSide::Upper;
  const auto tally = serial::fix_indices(KnapsackKernel<T>{&inst}, state.active, lambda, side,
                                         std::span<T>(state.x_dense), state.fixed_nonzero);
  state.fixed_rhs += tally.rhs;
  state.fixed_scale += tally.scale;
  state.fixed_count += tally.count;
  state.r_residual -= tally.rhs;
}

namespace detail {

/// Evaluator over an explicit active index list; the serial reference.
template <class Kernel>
class ActiveSetEvaluator {
 public:
  using T = typename Kernel::value_type;

  ActiveSetEvaluator(Kernel kernel, T r, OutputKind output, bool fixing)
      : kernel_(kernel), r_(r), output_(output), fixing_(fixing),
        state_(SolveState<T>::start(kernel.size(), r, output)) {}

  /// Starts from a caller-provided free list; everything else is fixed at zero
  /// (simplex initializers).
  ActiveSetEvaluator(Kernel kernel, T r, OutputKind output, bool fixing,
                     std::vector<std::size_t> active)
      : ActiveSetEvaluator(kernel, r, output, fixing) {
    state_.fixed_count = kernel.size() - active.size();
    state_.active = std::move(active);
  }

  PhiSums<T> eval(T lambda) const {
    return serial::phi_indices(kernel_, lambda, std::span<const std::size_t>(state_.active));
  }
  T rhs() const noexcept { return r_ - state_.fixed_rhs; }
  T fixed_scale() const noexcept { return state_.fixed_scale; }
  bool fixing() const noexcept { return fixing_; }
  std::size_t fixed_count() const noexcept { return state_.fixed_count; }

  void fix(T lambda, FixSide side) {
    const auto tally = serial::fix_indices(kernel_, state_.active, lambda, side,
                                           std::span<T>(state_.x_dense), state_.fixed_nonzero);
    state_.fixed_rhs += tally.rhs;
    state_.fixed_scale += tally.scale;
    state_.fixed_count += tally.count;
  }

  std::optional<T> nearest(T from, Direction dir) const {
    return serial::nearest_breakpoint(kernel_, std::span<const std::size_t>(state_.active), from, dir);
  }

  void finalize(T lambda, SolveOutcome<T>& out) {
    out.n = kernel_.size();
    out.output = output_;
    if (output_ == OutputKind::Dense) {
      for (std::size_t i : state_.active) state_.x_dense[i] = kernel_.x(i, lambda);
      out.x = std::move(state_.x_dense);
    } else {
      auto entries = std::move(state_.fixed_nonzero);
      for (std::size_t i : state_.active) {
        const T v = kernel_.x(i, lambda);
        if (v != 0) entries.push_back({i, v});
      }
      std::sort(entries.begin(), entries.end(),
                [](const auto& p, const auto& q) { return p.index < q.index; });
      out.x_sparse = std::move(entries);
    }
  }

  const std::vector<std::size_t>& active() const noexcept { return state_.active; }

 private:
  Kernel kernel_;
  T r_;
  OutputKind output_;
  bool fixing_;
  SolveState<T> state_;
};

/// Fixing-free evaluator: every evaluation is a stateless map over all
/// variables followed by a reduction.
template <class Kernel>
class FullMapEvaluator {
 public:
  using T = typename Kernel::value_type;

  FullMapEvaluator(Kernel kernel, T r, OutputKind output, int workers, bool ordered = true)
      : kernel_(kernel), r_(r), output_(output), workers_(workers), ordered_(ordered) {}

  PhiSums<T> eval(T lambda) const {
    return ordered_ ? omp_par::phi_full(kernel_, lambda, workers_)
                    : omp_par::phi_full_unordered(kernel_, lambda, workers_);
  }
  T rhs() const noexcept { return r_; }
  T fixed_scale() const noexcept { return T(0); }
  bool fixing() const noexcept { return false; }
  std::size_t fixed_count() const noexcept { return 0; }
  void fix(T, FixSide) {}

  std::optional<T> nearest(T from, Direction dir) const {
    return omp_par::nearest_breakpoint_full(kernel_, from, dir, workers_);
  }

  void finalize(T lambda, SolveOutcome<T>& out) {
    const std::size_t n = kernel_.size();
    out.n = n;
    out.output = output_;
    if (output_ == OutputKind::Dense) {
      out.x.resize(n);
      omp_block_map(n, workers_, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out.x[i] = kernel_.x(i, lambda);
      });
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const T v = kernel_.x(i, lambda);
        if (v != 0) out.x_sparse.push_back({i, v});
      }
    }
  }

 private:
  Kernel kernel_;
  T r_;
  OutputKind output_;
  int workers_;
  bool ordered_;
};

/// One recorded iterate, for tests and diagnostics.
template <std::floating_point T>
struct IterateRecord {
  T lambda;
  T residual;   // phi(lambda) - r
  T dminus;
  T dplus;
};

template <class T>
bool relative_residual_small(T g, T scale, T tau) {
  return std::abs(g) < tau * scale;
}

/// The multiplier iteration. `r` is the original right-hand side; the
/// evaluator reports the reduced one through rhs().
template <class Evaluator, class T = typename Evaluator::T>
SolveOutcome<T> run_newton(Evaluator& ev, T r, T lambda0, const SolverOptions<T>& opts,
                           std::vector<IterateRecord<T>>* trace = nullptr) {
  check_options(opts);
  constexpr T inf = std::numeric_limits<T>::infinity();
  const T tau = opts.tolerance_scale;

  SolveOutcome<T> out;
  T lo = -inf, hi = inf;
  T g_lo{}, g_hi{};
  T lambda = lambda0;
  int k = 0;

  auto finish = [&](T at) {
    out.status = Status::Solved;
    out.lambda = at;
    out.iterations = k;
    out.fixed_count = ev.fixed_count();
    ev.finalize(at, out);
    return out;
  };

  for (;;) {
    const PhiSums<T> s = ev.eval(lambda);
    ++out.phi_evals;
    const T g = s.value - ev.rhs();
    if (trace) trace->push_back({lambda, g, s.dminus, s.dplus});

    if (g == 0 || relative_residual_small(g, s.scale + ev.fixed_scale() + std::abs(r), tau))
      return finish(lambda);
    if (k >= opts.max_iterations)
      throw IterationLimitError("Newton iteration limit reached without convergence",
                                static_cast<double>(lambda), static_cast<double>(lo),
                                static_cast<double>(hi));

    T next;
    if (g < 0) {
      lo = lambda;
      g_lo = g;
      if (ev.fixing()) ev.fix(lambda, FixSide::Upper);
      if (s.dplus > 0) {
        const T step = -g / s.dplus;
        const T cand = lambda + step;
        if (std::abs(step) < tau) return finish(cand < hi ? cand : lambda);
        if (cand < hi) {
          next = cand;
        } else {
          next = secant_step(lo, g_lo, hi, g_hi, T(0));
        }
      } else {
        const auto bp = ev.nearest(lo, Direction::Right);
        if (!bp) {
          out.status = Status::Infeasible;
          out.lambda = lambda;
          out.iterations = k;
          out.fixed_count = ev.fixed_count();
          out.n = 0;
          return out;
        }
        next = *bp;
      }
    } else {
      hi = lambda;
      g_hi = g;
      if (ev.fixing()) ev.fix(lambda, FixSide::Lower);
      if (s.dminus > 0) {
        const T step = -g / s.dminus;
        const T cand = lambda + step;
        if (std::abs(step) < tau) return finish(cand > lo ? cand : lambda);
        if (cand > lo) {
          next = cand;
        } else {
          next = secant_step(lo, g_lo, hi, g_hi, T(0));
        }
      } else {
        const auto bp = ev.nearest(hi, Direction::Left);
        if (!bp) {
          out.status = Status::Infeasible;
          out.lambda = lambda;
          out.iterations = k;
          out.fixed_count = ev.fixed_count();
          out.n = 0;
          return out;
        }
        next = *bp;
      }
    }
    ++k;
    if (next == lambda) return finish(lambda);
    if (std::isfinite(lo) && std::isfinite(hi) &&
        hi - lo < tau * std::max(std::abs(hi), std::abs(lo)))
      return finish(next);
    lambda = next;
  }
}

}  // namespace detail

/// Semismooth Newton solve. `xbar` is an optional primal estimate whose
/// interior pattern seeds the initial multiplier.
template <std::floating_point T>
SolveOutcome<T> solve_cqk(const Instance<T>& inst, const SolverOptions<T>& opts = {},
                          PrimalHint<T> xbar = {},
                          std::vector<detail::IterateRecord<T>>* trace = nullptr) {
  validate(inst);
  check_options(opts);
  const T lambda0 = initial_multiplier(inst, xbar);
  const KnapsackKernel<T> kernel{&inst};
  if (opts.variable_fixing) {
    detail::ActiveSetEvaluator<KnapsackKernel<T>> ev(kernel, inst.r, opts.output, true);
    return detail::run_newton(ev, inst.r, lambda0, opts, trace);
  }
  detail::FullMapEvaluator<KnapsackKernel<T>> ev(kernel, inst.r, opts.output, 1);
  return detail::run_newton(ev, inst.r, lambda0, opts, trace);
}

}  // namespace cqk
