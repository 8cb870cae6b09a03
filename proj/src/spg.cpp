#include "cqk/spg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <span>

#include "cqk/newton.hpp"
#include "cqk/simplex.hpp"

namespace cqk {

namespace {

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const Vec& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double projected_gradient_norm(const SpgProblem& prob, const Vec& x, const Vec& g) {
  Vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - g[i];
  ProjectionStats unused;
  const Vec p = prob.project(z, prob.warm_start ? &x : nullptr, unused);
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(p[i] - x[i]));
  return m;
}

}  // namespace

SpgResult spg_solve(const SpgProblem& prob, const Vec& x0, double tol, int max_iter,
                    const SpgParams& params) {
  if (x0.size() != prob.n) throw DimensionMismatch("spg_solve: x0 has the wrong length");
  if (!(tol > 0)) throw DomainError("tol", DomainError::npos, "must be positive");

  SpgResult res;
  Vec x = x0;
  Vec g(prob.n), g_new(prob.n), d(prob.n), trial(prob.n), z(prob.n);
  double f = prob.objective(x);
  prob.gradient(x, g);
  std::deque<double> history{f};
  res.objective.push_back(f);
  res.reference_value.push_back(f);

  const double g0 = inf_norm(g);
  double alpha = std::clamp(g0 > 0 ? 1.0 / g0 : 1.0, params.step_min, params.step_max);

  for (;;) {
    res.pg_norm = projected_gradient_norm(prob, x, g);
    if (res.pg_norm < tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= max_iter) break;

    for (std::size_t i = 0; i < prob.n; ++i) z[i] = x[i] - alpha * g[i];
    ProjectionStats stats;
    const Vec p = prob.project(z, prob.warm_start ? &x : nullptr, stats);
    res.projections.push_back(stats);
    for (std::size_t i = 0; i < prob.n; ++i) d[i] = p[i] - x[i];

    const double f_ref = *std::max_element(history.begin(), history.end());
    const double gtd = dot(g, d);
    double t = 1.0;
    double f_trial;
    for (int bt = 0;; ++bt) {
      for (std::size_t i = 0; i < prob.n; ++i) trial[i] = x[i] + t * d[i];
      f_trial = prob.objective(trial);
      if (f_trial <= f_ref + params.gamma * t * gtd || bt >= params.max_backtracks) break;
      t *= params.backtrack;
    }

    prob.gradient(trial, g_new);
    double sts = 0, sty = 0;
    for (std::size_t i = 0; i < prob.n; ++i) {
      const double s = trial[i] - x[i];
      const double y = g_new[i] - g[i];
      sts += s * s;
      sty += s * y;
    }
    alpha = sty > 0 ? std::clamp(sts / sty, params.step_min, params.step_max) : params.step_max;

    x.swap(trial);
    g.swap(g_new);
    f = f_trial;
    ++res.iterations;
    history.push_back(f);
    if (history.size() > static_cast<std::size_t>(params.memory)) history.pop_front();
    res.objective.push_back(f);
    res.reference_value.push_back(*std::max_element(history.begin(), history.end()));
  }
  res.x = std::move(x);
  return res;
}

Vec project_svm_box(const Vec& z, const Vec& labels, double C, const Vec* hint, ProjectionStats& stats) {
  const std::size_t n = z.size();
  Instance<double> inst;
  inst.d.assign(n, 1.0);
  inst.b.assign(n, 1.0);
  inst.a.resize(n);
  inst.l.resize(n);
  inst.u.resize(n);
  inst.r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = labels[i] > 0;
    inst.a[i] = pos ? z[i] : -z[i];
    inst.l[i] = pos ? 0.0 : -C;
    inst.u[i] = pos ? C : 0.0;
  }
  Vec xbar;
  std::optional<std::span<const double>> warm;
  if (hint) {
    xbar.resize(n);
    for (std::size_t i = 0; i < n; ++i) xbar[i] = labels[i] > 0 ? (*hint)[i] : -(*hint)[i];
    warm = std::span<const double>(xbar);
  }
  auto out = solve_cqk(inst, SolverOptions<double>{}, warm);
  stats = {out.iterations, out.phi_evals, hint != nullptr};
  if (!out.solved()) throw std::runtime_error("svm projection: feasible set is empty");
  Vec x = std::move(out.x);
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] < 0) x[i] = -x[i];
  return x;
}

SpgProblem build_svm_dual(const Vec& points, std::size_t dim, const Vec& labels, double gamma,
                          double C, bool warm_start) {
  const std::size_t n = labels.size();
  if (dim == 0 || points.size() != n * dim)
    throw DimensionMismatch("build_svm_dual: points do not match labels and dim");
  if (n < 2) throw DomainError("labels", DomainError::npos, "need at least two points");
  if (!(gamma > 0)) throw DomainError("gamma", DomainError::npos, "must be positive");
  if (!(C > 0)) throw DomainError("C", DomainError::npos, "must be positive");
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1.0)
      has_pos = true;
    else if (labels[i] == -1.0)
      has_neg = true;
    else
      throw DomainError("labels", i, "must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw DomainError("labels", DomainError::npos, "both classes must be present");

  auto H = std::make_shared<Vec>(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double dist = 0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = points[i * dim + k] - points[j * dim + k];
        dist += diff * diff;
      }
      const double h = labels[i] * labels[j] * std::exp(-gamma * dist);
      (*H)[i * n + j] = h;
      (*H)[j * n + i] = h;
    }
  }
  auto matvec = [H, n](const Vec& x, Vec& out) {
    out.assign(n, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = H->data() + i * n;
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
      out[i] = s;
    }
  };

  SpgProblem prob;
  prob.n = n;
  prob.warm_start = warm_start;
  prob.x0.assign(n, 0.0);
  prob.objective = [matvec](const Vec& x) {
    Vec hx;
    matvec(x, hx);
    double f = 0;
    for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * x[i] * hx[i] - x[i];
    return f;
  };
  prob.gradient = [matvec](const Vec& x, Vec& g) {
    matvec(x, g);
    for (double& v : g) v -= 1.0;
  };
  prob.project = [labels, C](const Vec& z, const Vec* hint, ProjectionStats& stats) {
    return project_svm_box(z, labels, C, hint, stats);
  };
  return prob;
}

SpgProblem build_basis_pursuit(const SparseMatrix& A, const Vec& b, double r, bool warm_start) {
  if (A.rows != b.size()) throw DimensionMismatch("build_basis_pursuit: A has " + std::to_string(A.rows) +
                                                  " rows but b has length " + std::to_string(b.size()));
  if (A.nnz() == 0) throw DomainError("A", DomainError::npos, "matrix is zero");
  if (!(r > 0) || !std::isfinite(r)) throw DomainError("r", DomainError::npos, "must be finite and positive");

  auto mat = std::make_shared<SparseMatrix>(A);
  auto rhs = std::make_shared<Vec>(b);
  SpgProblem prob;
  prob.n = A.cols;
  prob.warm_start = warm_start;
  prob.x0.assign(A.cols, 0.0);
  prob.objective = [mat, rhs](const Vec& x) {
    Vec ax;
    mat->multiply(x, ax);
    double f = 0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
      const double e = ax[i] - (*rhs)[i];
      f += 0.5 * e * e;
    }
    return f;
  };
  prob.gradient = [mat, rhs](const Vec& x, Vec& g) {
    Vec ax;
    mat->multiply(x, ax);
    for (std::size_t i = 0; i < ax.size(); ++i) ax[i] -= (*rhs)[i];
    mat->multiply_transpose(ax, g);
  };
  prob.project = [r](const Vec& z, const Vec* hint, ProjectionStats& stats) {
    std::optional<std::span<const double>> warm;
    if (hint) warm = std::span<const double>(*hint);
    auto out = project_l1(std::span<const double>(z), r, SolverOptions<double>{}, warm);
    stats = {out.iterations, out.phi_evals, hint != nullptr};
    return std::move(out.x);
  };
  return prob;
}

}  // namespace cqk
