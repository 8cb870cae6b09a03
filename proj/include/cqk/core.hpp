#pragma once

// Problem data and the dual map for the continuous quadratic knapsack
//
//   min  1/2 x'Dx - a'x   s.t.  b'x = r,  l <= x <= u
//
// with D = diag(d) > 0 and b > 0. Dualizing b'x = r gives the clamped map
// x(lambda) and the non-decreasing piecewise-linear residual
// phi(lambda) = b'x(lambda); the problem is solved by a root of phi = r.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cqk {

/// Optional primal estimate (non-deduced).
template <class T>
using PrimalHint = std::type_identity_t<std::optional<std::span<const T>>>;

template <std::floating_point T>
struct Instance {
  std::vector<T> d;
  std::vector<T> a;
  std::vector<T> b;
  std::vector<T> l;
  std::vector<T> u;
  T r{};

  std::size_t size() const noexcept { return d.size(); }
};

/// Projection of y onto {x >= 0, sum(x) = r}.
template <std::floating_point T>
struct SimplexInstance {
  std::vector<T> y;
  T r{};

  std::size_t size() const noexcept { return y.size(); }
};

class DomainError : public std::invalid_argument {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DomainError(std::string field, std::size_t index, const std::string& reason)
      : std::invalid_argument(format(field, index, reason)),
        field_(std::move(field)),
        index_(index) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t index() const noexcept { return index_; }

 private:
  static std::string format(const std::string& field, std::size_t index,
                            const std::string& reason) {
    std::string msg = "invalid " + field;
    if (index != npos) msg += " at index " + std::to_string(index);
    return msg + ": " + reason;
  }

  std::string field_;
  std::size_t index_;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Machine epsilon of the working precision raised to 3/4.
template <std::floating_point T>
T default_tolerance() {
  return std::pow(std::numeric_limits<T>::epsilon(), T(0.75));
}

template <std::floating_point T>
void validate(const Instance<T>& inst) {
  const std::size_t n = inst.size();
  if (n == 0) throw DomainError("size", DomainError::npos, "instance is empty");
  if (inst.a.size() != n || inst.b.size() != n || inst.l.size() != n ||
      inst.u.size() != n)
    throw DomainError("size", DomainError::npos, "array lengths differ");

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(inst.d[i]) || !(inst.d[i] > 0))
      throw DomainError("d", i, "must be finite and positive");
    if (!std::isfinite(inst.a[i])) throw DomainError("a", i, "must be finite");
    if (!std::isfinite(inst.b[i]) || !(inst.b[i] > 0))
      throw DomainError("b", i, "must be finite and positive");
    if (std::isnan(inst.l[i]) || inst.l[i] == std::numeric_limits<T>::infinity())
      throw DomainError("l", i, "must be a number below +inf");
    if (std::isnan(inst.u[i]) || inst.u[i] == -std::numeric_limits<T>::infinity())
      throw DomainError("u", i, "must be a number above -inf");
    if (!(inst.l[i] <= inst.u[i])) throw DomainError("bounds", i, "l > u");
  }
  if (!std::isfinite(inst.r)) throw DomainError("r", DomainError::npos, "must be finite");
}

template <std::floating_point T>
void validate(const SimplexInstance<T>& inst) {
  if (inst.size() == 0) throw DomainError("size", DomainError::npos, "instance is empty");
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (!std::isfinite(inst.y[i])) throw DomainError("y", i, "must be finite");
  if (!std::isfinite(inst.r) || !(inst.r > 0))
    throw DomainError("r", DomainError::npos, "must be finite and positive");
}

/// Simplex projection as a knapsack instance: d = b = 1, a = y, l = 0, u = inf.
template <std::floating_point T>
Instance<T> as_knapsack(const SimplexInstance<T>& s) {
  const std::size_t n = s.size();
  return Instance<T>{std::vector<T>(n, T(1)), s.y, std::vector<T>(n, T(1)),
                     std::vector<T>(n, T(0)),
                     std::vector<T>(n, std::numeric_limits<T>::infinity()), s.r};
}

template <std::floating_point T>
Instance<T> convert_precision(const Instance<double>& src) {
  auto cast = [](const std::vector<double>& v) { return std::vector<T>(v.begin(), v.end()); };
  return Instance<T>{cast(src.d), cast(src.a), cast(src.b), cast(src.l), cast(src.u),
                     static_cast<T>(src.r)};
}

// ---------------------------------------------------------------------------
// Per-element kernel

/// Breakpoints of one variable; an infinite bound yields an infinite breakpoint.
template <std::floating_point T>
inline T lower_breakpoint(T d, T a, T b, T l) noexcept { return (d * l - a) / b; }

template <std::floating_point T>
inline T upper_breakpoint(T d, T a, T b, T u) noexcept { return (d * u - a) / b; }

/// x(lambda)_i. Clamped exactly to the bound whenever lambda is on the far side
/// of the corresponding breakpoint, so that bound values never pick up rounding.
template <std::floating_point T>
inline T element_x(T d, T a, T b, T l, T u, T lambda) noexcept {
  if (lambda <= lower_breakpoint(d, a, b, l)) return l;
  if (lambda >= upper_breakpoint(d, a, b, u)) return u;
  return std::max(l, std::min(u, (b * lambda + a) / d));
}

/// Partial sums of one phi evaluation. `scale` is sum |b_i x_i|, used by the
/// relative residual test.
template <std::floating_point T>
struct PhiSums {
  T value{};
  T dminus{};
  T dplus{};
  T scale{};

  PhiSums& operator+=(const PhiSums& o) noexcept {
    value += o.value;
    dminus += o.dminus;
    dplus += o.dplus;
    scale += o.scale;
    return *this;
  }
  friend PhiSums operator+(PhiSums x, const PhiSums& y) noexcept { return x += y; }
};

/// Adds variable i's contribution to phi and both lateral derivatives.
/// dplus collects lo <= lambda < hi, dminus collects lo < lambda <= hi.
template <std::floating_point T>
inline void accumulate_element(PhiSums<T>& s, T d, T a, T b, T l, T u, T lambda) noexcept {
  const T lo = lower_breakpoint(d, a, b, l);
  const T hi = upper_breakpoint(d, a, b, u);
  T x;
  if (lambda <= lo) {
    x = l;
    if (lambda == lo && lo < hi) s.dplus += b * b / d;
  } else if (lambda >= hi) {
    x = u;
    if (lambda == hi) s.dminus += b * b / d;
  } else {
    x = std::max(l, std::min(u, (b * lambda + a) / d));
    const T w = b * b / d;
    s.dplus += w;
    s.dminus += w;
  }
  s.value += b * x;
  s.scale += std::abs(b * x);
}

/// Simplex specialization: breakpoint -y_i, unit weights, bounds [0, inf).
template <std::floating_point T>
inline void accumulate_simplex(PhiSums<T>& s, T y, T lambda) noexcept {
  const T t = y + lambda;
  if (t > 0) {
    s.value += t;
    s.scale += t;
    s.dplus += 1;
    s.dminus += 1;
  } else if (t == 0) {
    s.dplus += 1;
  }
}

// ---------------------------------------------------------------------------
// Dual map

template <std::floating_point T>
struct PhiEval {
  T value{};
  T dminus{};
  T dplus{};
};

template <std::floating_point T>
std::vector<T> eval_x(const Instance<T>& inst, T lambda) {
  const std::size_t n = inst.size();
  std::vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = element_x(inst.d[i], inst.a[i], inst.b[i], inst.l[i], inst.u[i], lambda);
  return x;
}

template <std::floating_point T>
PhiEval<T> eval_phi(const Instance<T>& inst, T lambda) {
  PhiSums<T> s;
  for (std::size_t i = 0; i < inst.size(); ++i)
    accumulate_element(s, inst.d[i], inst.a[i], inst.b[i], inst.l[i], inst.u[i], lambda);
  return {s.value, s.dminus, s.dplus};
}

/// Multiplier of the bound-free solution restricted to J. J is every index,
/// or the interior of xbar when given and nonempty.
template <std::floating_point T>
T initial_multiplier(const Instance<T>& inst, PrimalHint<T> xbar = {}) {
  const std::size_t n = inst.size();
  if (xbar && xbar->size() != n)
    throw DomainError("xbar", DomainError::npos, "length differs from instance");
  T s{}, q{};
  if (xbar) {
    for (std::size_t i = 0; i < n; ++i) {
      const T xi = (*xbar)[i];
      if (inst.l[i] < xi && xi < inst.u[i]) {
        s += inst.b[i] * inst.a[i] / inst.d[i];
        q += inst.b[i] * inst.b[i] / inst.d[i];
      }
    }
  }
  if (q == 0) {
    s = T(0);
    for (std::size_t i = 0; i < n; ++i) {
      s += inst.b[i] * inst.a[i] / inst.d[i];
      q += inst.b[i] * inst.b[i] / inst.d[i];
    }
  }
  return (inst.r - s) / q;
}

template <std::floating_point T>
struct IndexedValue {
  std::size_t index;
  T value;
  friend bool operator==(const IndexedValue&, const IndexedValue&) = default;
};

template <std::floating_point T>
struct Breakpoints {
  std::vector<IndexedValue<T>> lower;
  std::vector<IndexedValue<T>> upper;
};

template <std::floating_point T>
Breakpoints<T> breakpoints(const Instance<T>& inst) {
  Breakpoints<T> out;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (std::isfinite(inst.l[i]))
      out.lower.push_back({i, lower_breakpoint(inst.d[i], inst.a[i], inst.b[i], inst.l[i])});
    if (std::isfinite(inst.u[i]))
      out.upper.push_back({i, upper_breakpoint(inst.d[i], inst.a[i], inst.b[i], inst.u[i])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solver options and outcome

enum class OutputKind { Dense, Sparse };

template <std::floating_point T>
struct SolverOptions {
  bool variable_fixing = true;
  int max_iterations = 100;
  T tolerance_scale = default_tolerance<T>();
  OutputKind output = OutputKind::Dense;
};

enum class Status { Solved, Infeasible };

template <std::floating_point T>
struct SolveOutcome {
  Status status = Status::Solved;
  T lambda{};
  std::size_t n = 0;
  OutputKind output = OutputKind::Dense;
  std::vector<T> x;                            // dense form
  std::vector<IndexedValue<T>> x_sparse;       // nonzero entries, ascending index
  int iterations = 0;
  int phi_evals = 0;
  std::size_t fixed_count = 0;

  bool solved() const noexcept { return status == Status::Solved; }

  std::vector<T> dense() const {
    if (output == OutputKind::Dense) return x;
    std::vector<T> out(n, T(0));
    for (const auto& e : x_sparse) out[e.index] = e.value;
    return out;
  }
};

class IterationLimitError : public std::runtime_error {
 public:
  IterationLimitError(const std::string& what, double lambda, double lo, double hi)
      : std::runtime_error(what), lambda_(lambda), lo_(lo), hi_(hi) {}
  double lambda() const noexcept { return lambda_; }
  double bracket_lo() const noexcept { return lo_; }
  double bracket_hi() const noexcept { return hi_; }

 private:
  double lambda_, lo_, hi_;
};

template <std::floating_point T>
void check_options(const SolverOptions<T>& opts) {
  if (opts.max_iterations < 1)
    throw DomainError("max_iterations", DomainError::npos, "must be at least 1");
  if (!(opts.tolerance_scale > 0))
    throw DomainError("tolerance_scale", DomainError::npos, "must be positive");
}

}  // namespace cqk
