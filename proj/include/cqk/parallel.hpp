#pragma once

// Parallel execution of the Newton solvers.
//
// Chunked scheme: the variables are split into contiguous chunks, each owned
// by one worker. Per iteration every worker sums its chunk's share of phi and
// the lateral derivatives at the shared multiplier (map), the partials are
// combined in a fixed order (reduce), and the multiplier update runs once on
// the calling thread. Workers then fix variables inside their own chunk;
// chunks whose active count drops below the merge threshold are coalesced.
//
// Jacobi scheme: no fixing and no index lists. Each evaluation is a
// stateless map over all variables, so the per-element work depends only on
// the multiplier and the element's data.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cqk/core.hpp"
#include "cqk/kernels.hpp"
#include "cqk/newton.hpp"
#include "cqk/simplex.hpp"

namespace cqk {

/// Worker count from CQK_WORKERS, falling back to the OpenMP default.
inline int default_workers() {
  if (const char* env = std::getenv("CQK_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  return std::max(1u, std::thread::hardware_concurrency());
#endif
}

struct ParallelOptions {
  int workers = 1;
  std::size_t merge_threshold = 1024;
  // Fixed-order reductions; when false the fixing-free map may use an
  // OpenMP reduction clause with unspecified summation order.
  bool deterministic = true;
};

namespace detail {

template <std::floating_point T>
struct Chunk {
  std::vector<std::size_t> active;
  std::vector<IndexedValue<T>> fixed_nonzero;
};

template <class Kernel>
class ChunkedEvaluator {
 public:
  using T = typename Kernel::value_type;

  ChunkedEvaluator(Kernel kernel, T r, OutputKind output, bool fixing, const ParallelOptions& popts,
                   std::vector<std::vector<std::size_t>> lists)
      : kernel_(kernel), r_(r), output_(output), fixing_(fixing), popts_(popts) {
    std::size_t total = 0;
    for (auto& l : lists) {
      total += l.size();
      chunks_.push_back({std::move(l), {}});
    }
    fixed_count_ = kernel.size() - total;
    if (output == OutputKind::Dense) x_dense_.assign(kernel.size(), T(0));
  }

  /// Contiguous equal-size chunks over all variables.
  static std::vector<std::vector<std::size_t>> contiguous(std::size_t n, int workers) {
    const auto count = static_cast<std::size_t>(clamp_workers(workers, n));
    std::vector<std::vector<std::size_t>> lists(count);
#pragma omp parallel for num_threads(static_cast<int>(count)) schedule(static, 1)
    for (std::size_t c = 0; c < count; ++c) {
      const auto r = block_range(n, count, c);
      auto& l = lists[c];
      l.resize(r.end - r.begin);
      for (std::size_t i = r.begin; i < r.end; ++i) l[i - r.begin] = i;
    }
    return lists;
  }

  PhiSums<T> eval(T lambda) const {
    std::vector<PhiSums<T>> parts(chunks_.size());
    for_each_chunk([&](std::size_t c) {
      parts[c] = serial::phi_indices(kernel_, lambda, std::span<const std::size_t>(chunks_[c].active));
    });
    return tree_sum(std::move(parts));
  }

  T rhs() const noexcept { return r_ - fixed_rhs_; }
  T fixed_scale() const noexcept { return fixed_scale_; }
  bool fixing() const noexcept { return fixing_; }
  std::size_t fixed_count() const noexcept { return fixed_count_; }

  void fix(T lambda, FixSide side) {
    std::vector<serial::FixTally<T>> tallies(chunks_.size());
    std::span<T> dense(x_dense_);
    for_each_chunk([&](std::size_t c) {
      tallies[c] = serial::fix_indices(kernel_, chunks_[c].active, lambda, side, dense,
                                       chunks_[c].fixed_nonzero);
    });
    T rhs{}, scale{};
    for (const auto& t : tallies) {
      rhs += t.rhs;
      scale += t.scale;
      fixed_count_ += t.count;
    }
    fixed_rhs_ += rhs;
    fixed_scale_ += scale;
    merge_small_chunks();
  }

  std::optional<T> nearest(T from, Direction dir) const {
    std::vector<std::optional<T>> best(chunks_.size());
    for_each_chunk([&](std::size_t c) {
      best[c] = serial::nearest_breakpoint(kernel_, std::span<const std::size_t>(chunks_[c].active),
                                           from, dir);
    });
    std::optional<T> out;
    for (const auto& b : best) {
      if (!b) continue;
      if (!out || (dir == Direction::Right ? *b < *out : *b > *out)) out = b;
    }
    return out;
  }

  void finalize(T lambda, SolveOutcome<T>& out) {
    out.n = kernel_.size();
    out.output = output_;
    if (output_ == OutputKind::Dense) {
      for_each_chunk([&](std::size_t c) {
        for (std::size_t i : chunks_[c].active) x_dense_[i] = kernel_.x(i, lambda);
      });
      out.x = std::move(x_dense_);
      return;
    }
    std::vector<std::vector<IndexedValue<T>>> parts(chunks_.size());
    for_each_chunk([&](std::size_t c) {
      auto& p = parts[c];
      p = std::move(chunks_[c].fixed_nonzero);
      for (std::size_t i : chunks_[c].active) {
        const T v = kernel_.x(i, lambda);
        if (v != 0) p.push_back({i, v});
      }
    });
    for (auto& p : parts) out.x_sparse.insert(out.x_sparse.end(), p.begin(), p.end());
    std::sort(out.x_sparse.begin(), out.x_sparse.end(),
              [](const auto& p, const auto& q) { return p.index < q.index; });
  }

  std::size_t chunk_count() const noexcept { return chunks_.size(); }

  /// All active indices, chunk by chunk.
  std::vector<std::size_t> active() const {
    std::vector<std::size_t> out;
    for (const auto& c : chunks_) out.insert(out.end(), c.active.begin(), c.active.end());
    return out;
  }

 private:
  template <class F>
  void for_each_chunk(F&& f) const {
    const std::size_t m = chunks_.size();
    const int threads = static_cast<int>(std::min<std::size_t>(m, static_cast<std::size_t>(std::max(1, popts_.workers))));
    if (threads <= 1) {
      for (std::size_t c = 0; c < m; ++c) f(c);
      return;
    }
#pragma omp parallel for num_threads(threads) schedule(static, 1)
    for (std::size_t c = 0; c < m; ++c) f(c);
  }

  // Coalesces every chunk below the threshold into the first such chunk,
  // keeping chunk order.
  void merge_small_chunks() {
    std::size_t target = chunks_.size();
    std::size_t small = 0;
    for (std::size_t c = 0; c < chunks_.size(); ++c) {
      if (chunks_[c].active.size() < popts_.merge_threshold) {
        if (small++ == 0) target = c;
      }
    }
    if (small < 2) return;
    std::vector<Chunk<T>> kept;
    kept.reserve(chunks_.size() - small + 1);
    for (std::size_t c = 0; c < chunks_.size(); ++c) {
      auto& ch = chunks_[c];
      if (ch.active.size() >= popts_.merge_threshold) {
        kept.push_back(std::move(ch));
      } else if (c == target) {
        kept.push_back(std::move(ch));
        target = kept.size() - 1;
      } else {
        auto& into = kept[target];
        into.active.insert(into.active.end(), ch.active.begin(), ch.active.end());
        into.fixed_nonzero.insert(into.fixed_nonzero.end(), ch.fixed_nonzero.begin(),
                                  ch.fixed_nonzero.end());
      }
    }
    chunks_ = std::move(kept);
  }

  Kernel kernel_;
  T r_;
  OutputKind output_;
  bool fixing_;
  ParallelOptions popts_;
  std::vector<Chunk<T>> chunks_;
  std::vector<T> x_dense_;
  T fixed_rhs_{};
  T fixed_scale_{};
  std::size_t fixed_count_ = 0;
};

template <std::floating_point T>
struct MultiplierSums {
  T s_interior{}, q_interior{}, s_all{}, q_all{};
  MultiplierSums operator+(const MultiplierSums& o) const noexcept {
    return {s_interior + o.s_interior, q_interior + o.q_interior, s_all + o.s_all, q_all + o.q_all};
  }
};

}  // namespace detail

/// Same value as initial_multiplier, computed as a blocked map/reduce.
template <std::floating_point T>
T par_initial_multiplier(const Instance<T>& inst, PrimalHint<T> xbar,
                         int workers) {
  if (xbar && xbar->size() != inst.size())
    throw DomainError("xbar", DomainError::npos, "length differs from instance");
  auto sums = omp_block_reduce<detail::MultiplierSums<T>>(
      inst.size(), workers, [&](detail::MultiplierSums<T>& acc, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const T ba = inst.b[i] * inst.a[i] / inst.d[i];
          const T bb = inst.b[i] * inst.b[i] / inst.d[i];
          acc.s_all += ba;
          acc.q_all += bb;
          if (xbar && inst.l[i] < (*xbar)[i] && (*xbar)[i] < inst.u[i]) {
            acc.s_interior += ba;
            acc.q_interior += bb;
          }
        }
      });
  if (sums.q_interior > 0) return (inst.r - sums.s_interior) / sums.q_interior;
  return (inst.r - sums.s_all) / sums.q_all;
}

/// Chunked parallel Newton with per-chunk variable fixing.
template <std::floating_point T>
SolveOutcome<T> par_solve_cqk(const Instance<T>& inst, const SolverOptions<T>& opts,
                              const ParallelOptions& popts,
                              PrimalHint<T> xbar = {}) {
  validate(inst);
  check_options(opts);
  if (popts.workers < 1) throw DomainError("workers", DomainError::npos, "must be at least 1");
  const T lambda0 = par_initial_multiplier(inst, xbar, popts.workers);
  using Eval = detail::ChunkedEvaluator<KnapsackKernel<T>>;
  Eval ev(KnapsackKernel<T>{&inst}, inst.r, opts.output, opts.variable_fixing, popts,
          Eval::contiguous(inst.size(), popts.workers));
  return detail::run_newton(ev, inst.r, lambda0, opts);
}

/// Fixing-free Newton with the bound-free initial multiplier; every phi
/// evaluation and the final primal vector are plain maps over all variables.
template <std::floating_point T>
SolveOutcome<T> jacobi_solve(const Instance<T>& inst, const SolverOptions<T>& opts,
                             const ParallelOptions& popts,
                             std::vector<detail::IterateRecord<T>>* trace = nullptr) {
  validate(inst);
  check_options(opts);
  if (popts.workers < 1) throw DomainError("workers", DomainError::npos, "must be at least 1");
  const T lambda0 = par_initial_multiplier<T>(inst, std::nullopt, popts.workers);
  detail::FullMapEvaluator<KnapsackKernel<T>> ev(KnapsackKernel<T>{&inst}, inst.r, opts.output,
                                                 popts.workers, popts.deterministic);
  return detail::run_newton(ev, inst.r, lambda0, opts, trace);
}

/// jacobi_solve specialized to the simplex: lambda0 = (r - sum y) / n.
template <std::floating_point T>
SolveOutcome<T> jacobi_project_simplex(std::span<const T> y, T r, const SolverOptions<T>& opts,
                                       const ParallelOptions& popts) {
  detail::check_simplex_args(y, r);
  check_options(opts);
  struct Sum {
    T v{};
    Sum operator+(const Sum& o) const noexcept { return {v + o.v}; }
  };
  const Sum total = omp_block_reduce<Sum>(y.size(), popts.workers, [&](Sum& acc, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) acc.v += y[i];
  });
  const T lambda0 = (r - total.v) / static_cast<T>(y.size());
  detail::FullMapEvaluator<SimplexKernel<T>> ev(SimplexKernel<T>{y}, r, opts.output, popts.workers,
                                                popts.deterministic);
  return detail::run_newton(ev, r, lambda0, opts);
}

namespace detail {

template <std::floating_point T>
struct ChunkedInit {
  T lambda0{};
  std::vector<std::vector<std::size_t>> free;  // J per chunk
};

template <std::floating_point T>
ChunkedInit<T> par_init_chunks(const InitValues<T>& vals, T r, int workers,
                               PrimalHint<T> xbar) {
  const std::size_t n = vals.y.size();
  const auto count = static_cast<std::size_t>(clamp_workers(workers, n));
  std::vector<InitResult<T>> parts(count);
  std::vector<char> empty(count, 0);
#pragma omp parallel for num_threads(static_cast<int>(count)) schedule(static, 1)
  for (std::size_t c = 0; c < count; ++c) {
    const auto rg = block_range(n, count, c);
    try {
      parts[c] = init_lambda(vals, r, IotaRange{rg.begin, rg.end}, xbar, n, false);
    } catch (const EmptyIndexSet&) {
      empty[c] = 1;  // an l1 chunk holding only zeros
    }
  }
  ChunkedInit<T> out;
  out.free.resize(count);
  if (count == 1) {
    if (empty[0]) throw EmptyIndexSet();
    out.lambda0 = parts[0].lambda0;
    out.free[0] = std::move(parts[0].free);
    return out;
  }
  T sum{};
  std::size_t contributing = 0;
  std::size_t first_chunk = count;
  for (std::size_t c = 0; c < count; ++c) {
    if (empty[c]) continue;
    if (first_chunk == count) first_chunk = c;
    sum += parts[c].contrib_sum;
    contributing += parts[c].contrib_count;
    out.free[c] = std::move(parts[c].free);
  }
  if (first_chunk == count) throw EmptyIndexSet();
  if (contributing > 0) {
    out.lambda0 = (r - sum) / static_cast<T>(contributing);
  } else {
    out.lambda0 = std::max(r / static_cast<T>(n), -vals.value(out.free[first_chunk].front()));
  }
  return out;
}

}  // namespace detail

/// The simplex initializer run independently on contiguous chunks; lambda0
/// is recomputed from the union of the chunk free sets using the partial sums.
template <std::floating_point T>
InitResult<T> par_simplex_init(std::span<const T> y, T r, int workers,
                               PrimalHint<T> xbar = {}) {
  detail::check_simplex_args(y, r);
  auto ci = detail::par_init_chunks(detail::InitValues<T>{y, detail::InitTest::Simplex}, r, workers, xbar);
  InitResult<T> res;
  res.lambda0 = ci.lambda0;
  for (auto& f : ci.free) res.free.insert(res.free.end(), f.begin(), f.end());
  res.fixed_mask.assign(y.size(), 1);
  for (std::size_t j : res.free) res.fixed_mask[j] = 0;
  return res;
}

/// Specialized simplex Newton on chunks: parallel initializer, then the
/// chunked map/reduce iteration with per-chunk fixing.
template <std::floating_point T>
SolveOutcome<T> par_project_simplex(std::span<const T> y, T r, const SolverOptions<T>& opts,
                                    const ParallelOptions& popts,
                                    PrimalHint<T> xbar = {}) {
  detail::check_simplex_args(y, r);
  if (popts.workers < 1) throw DomainError("workers", DomainError::npos, "must be at least 1");
  auto ci = detail::par_init_chunks(detail::InitValues<T>{y, detail::InitTest::Simplex}, r,
                                    popts.workers, xbar);
  using Eval = detail::ChunkedEvaluator<SimplexKernel<T>>;
  if (!opts.variable_fixing) {
    Eval ev(SimplexKernel<T>{y}, r, opts.output, false, popts, Eval::contiguous(y.size(), popts.workers));
    return detail::run_simplex_newton(ev, r, ci.lambda0, opts);
  }
  Eval ev(SimplexKernel<T>{y}, r, opts.output, true, popts, std::move(ci.free));
  return detail::run_simplex_newton(ev, r, ci.lambda0, opts);
}

}  // namespace cqk
