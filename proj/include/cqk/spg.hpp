#pragma once

// Spectral projected gradient with a nonmonotone Armijo line search, plus
// the two problem builders it is used with: the kernel SVM dual and the
// l1-constrained least-squares (basis pursuit) problem.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cqk/core.hpp"
#include "cqk/instances.hpp"

namespace cqk {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Effort of one projection call.
struct ProjectionStats {
  int iterations = 0;
  int phi_evals = 0;
  bool warm = false;
};

using Vec = std::vector<double>;

struct SpgProblem {
  std::size_t n = 0;
  std::function<double(const Vec&)> objective;
  std::function<void(const Vec&, Vec&)> gradient;
  /// Projects z onto the feasible set. `hint` is a nearby feasible point used
  /// for warm starting, or null.
  std::function<Vec(const Vec& z, const Vec* hint, ProjectionStats& stats)> project;
  bool warm_start = false;
  Vec x0;  // default starting point
};

struct SpgParams {
  int memory = 10;
  double gamma = 1e-4;
  double backtrack = 0.5;
  double step_min = 1e-10;
  double step_max = 1e10;
  int max_backtracks = 60;
};

struct SpgResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
  double pg_norm = 0;  // ||P(x - g(x)) - x||_inf at x
  // One entry per iteration: the projection computing the search direction.
  std::vector<ProjectionStats> projections;
  std::vector<double> objective;        // f(x_k), k = 0..iterations
  std::vector<double> reference_value;  // max of the last M objective values
};

SpgResult spg_solve(const SpgProblem& prob, const Vec& x0, double tol, int max_iter,
                    const SpgParams& params = {});

/// Kernel SVM dual: min 1/2 x'Hx - e'x s.t. y'x = 0, 0 <= x <= C, with
/// H_ij = y_i y_j exp(-gamma |z_i - z_j|^2) held densely.
SpgProblem build_svm_dual(const Vec& points, std::size_t dim, const Vec& labels, double gamma,
                          double C, bool warm_start);

/// min 1/2 |Ax - b|^2 s.t. |x|_1 <= r, started from the origin.
SpgProblem build_basis_pursuit(const SparseMatrix& A, const Vec& b, double r, bool warm_start);

/// Projection of z onto {y'x = 0, 0 <= x <= C} through the knapsack solver,
/// after flipping the variables with label -1.
Vec project_svm_box(const Vec& z, const Vec& labels, double C, const Vec* hint, ProjectionStats& stats);

}  // namespace cqk
