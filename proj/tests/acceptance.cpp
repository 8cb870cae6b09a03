// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cqk/instances.hpp"
#include "cqk/newton.hpp"
#include "cqk/parallel.hpp"
#include "cqk/simplex.hpp"
#include "cqk/spg.hpp"
#include "cqk/timing.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace cqk;
using V = std::vector<double>;

namespace {

const Family kCqk[] = {Family::CqkUncorrelated, Family::CqkWeaklyCorrelated, Family::CqkCorrelated};
const Family kSimplex[] = {Family::SimplexU01, Family::SimplexN01, Family::SimplexN0m3};
const std::size_t kOracleSizes[] = {10, 100, 1000, 10000};
constexpr int kOracleInstances = 1000;

const double kTau = std::pow(std::numeric_limits<double>::epsilon(), 0.75);

/// Collects failures for one criterion; keeps the first few messages.
struct Check {
  long checks = 0;
  long failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::function<std::string()>& what) {
    ++checks;
    if (ok) return;
    if (++failures <= 5) notes.push_back(what());
  }
};

bool report(int id, const std::string& title, const Check& c, const std::string& detail, double secs) {
  const bool ok = c.failures == 0;
  std::printf("criterion %2d %s: %s (%ld checks, %ld failures; %s; %.1fs)\n", id, ok ? "PASS" : "FAIL",
              title.c_str(), c.checks, c.failures, detail.c_str(), secs);
  for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  return ok;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

/// Criterion 1 on the original instance: |phi(lambda) - r| < tau (sum |b_i x_i| + |r|).
bool residual_ok(const Instance<double>& inst, double lambda) {
  long double phi = 0, scale = 0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const long double x = element_x(inst.d[i], inst.a[i], inst.b[i], inst.l[i], inst.u[i], lambda);
    phi += inst.b[i] * x;
    scale += std::abs(inst.b[i] * x);
  }
  return std::abs(phi - inst.r) < kTau * (scale + std::abs(inst.r));
}

bool simplex_residual_ok(const V& y, double r, double lambda) {
  long double s = 0;
  for (double v : y) s += std::max(0.0, v + lambda);
  return std::abs(s - r) < kTau * (s + std::abs(r));
}

// ---------------------------------------------------------------------------

bool criterion1(Check& calib) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  for (Family fam : kCqk) {
    for (std::size_t n : kOracleSizes) {
      for (int k = 0; k < kOracleInstances; ++k) {
        const auto inst = gen_cqk({fam, n, static_cast<std::uint64_t>(k)});
        const auto ref = oracle::oracle_lambda(inst);
        const double ltol = 1e-10 * std::max(1.0, std::abs(ref.lambda));
        const double xtol = 1e-10 * std::max(1.0, testutil::inf_norm(ref.x));
        for (bool fixing : {true, false}) {
          SolverOptions<double> opts;
          opts.variable_fixing = fixing;
          const auto out = solve_cqk(inst, opts);
          auto tag = [&] {
            std::ostringstream os;
            os << family_name(fam) << " n=" << n << " seed=" << k << " fixing=" << fixing;
            return os.str();
          };
          c.expect(out.status == ref.status, [&] { return tag() + ": status differs"; });
          if (out.status != Status::Solved || ref.status != Status::Solved) continue;
          const double dl = std::abs(out.lambda - ref.lambda);
          const double dx = testutil::max_abs_diff(out.x, ref.x);
          c.expect(dl <= ltol, [&] { return tag() + fmt(": |dlambda| = %.3g (tol %.3g)", dl, ltol); });
          c.expect(dx <= xtol, [&] { return tag() + fmt(": |dx| = %.3g (tol %.3g)", dx, xtol); });
          calib.expect(residual_ok(inst, out.lambda), [&] { return "cqk " + tag() + ": criterion 1 residual"; });
        }
      }
    }
  }
  return report(1, "oracle equivalence, knapsack", c, "3 classes x 4 sizes x 1000 seeds, fixing on/off",
                seconds_since(t0));
}

bool criterion2(Check& calib) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  ParallelOptions popts;
  popts.workers = default_workers();
  for (Family fam : kSimplex) {
    for (std::size_t n : kOracleSizes) {
      for (int k = 0; k < kOracleInstances; ++k) {
        const auto seed = static_cast<std::uint64_t>(k);
        const V y = gen_simplex_y({fam, n, seed});
        const double r = kDefaultSimplexRadius;
        const auto ref = oracle::oracle_simplex(y, r);
        const double ltol = 1e-10 * std::max(1.0, std::abs(ref.lambda));
        const double xtol = 1e-10 * std::max(1.0, testutil::inf_norm(ref.x));
        auto tag = [&](const char* m) {
          std::ostringstream os;
          os << m << ' ' << family_name(fam) << " n=" << n << " seed=" << k;
          return os.str();
        };
        auto compare = [&](const char* m, double lambda, const V& x) {
          const double dl = std::abs(lambda - ref.lambda);
          const double dx = testutil::max_abs_diff(x, ref.x);
          c.expect(dl <= ltol, [&] { return tag(m) + fmt(": |dlambda| = %.3g (tol %.3g)", dl, ltol); });
          c.expect(dx <= xtol, [&] { return tag(m) + fmt(": |dx| = %.3g (tol %.3g)", dx, xtol); });
          calib.expect(simplex_residual_ok(y, r, lambda), [&] { return tag(m) + ": criterion 1 residual"; });
        };

        const auto nw = newton_project_simplex<double>(y, r);
        c.expect(nw.solved(), [&] { return tag("newton") + ": not solved"; });
        compare("newton", nw.lambda, nw.x);
        const auto cd = condat_project_full<double>(y, r);
        compare("condat", cd.lambda, cd.x);
        const auto jc = jacobi_solve(testutil::simplex_as_cqk(y, r), {}, popts);
        c.expect(jc.solved(), [&] { return tag("jacobi") + ": not solved"; });
        compare("jacobi", jc.lambda, jc.x);

        // l1 ball: random signs on y, radius below |y|_1 so the projection is active.
        Xoshiro256pp rng(seed ^ 0x5a5a);
        V ys = y;
        double norm1 = 0;
        for (auto& v : ys) {
          if (rng.uniform() < 0.5) v = -v;
          norm1 += std::abs(v);
        }
        const double rl = norm1 * 0.25;
        V mag(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) mag[i] = std::abs(ys[i]);
        const auto lref = oracle::oracle_simplex(mag, rl);
        V lx = lref.x;
        for (std::size_t i = 0; i < y.size(); ++i)
          if (ys[i] < 0) lx[i] = -lx[i];
        const auto l1 = project_l1<double>(ys, rl);
        const double dl = std::abs(l1.lambda - lref.lambda);
        const double lt = 1e-10 * std::max(1.0, std::abs(lref.lambda));
        const double dx = testutil::max_abs_diff(l1.x, lx);
        const double xt = 1e-10 * std::max(1.0, testutil::inf_norm(lx));
        c.expect(dl <= lt, [&] { return tag("l1") + fmt(": |dlambda| = %.3g (tol %.3g)", dl, lt); });
        c.expect(dx <= xt, [&] { return tag("l1") + fmt(": |dx| = %.3g (tol %.3g)", dx, xt); });
        calib.expect(simplex_residual_ok(mag, rl, l1.lambda), [&] { return tag("l1") + ": criterion 1 residual"; });
      }
    }
  }
  return report(2, "oracle equivalence, simplex and l1", c,
                "3 types x 4 sizes x 1000 seeds; newton, condat, jacobi, l1", seconds_since(t0));
}

bool criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  Xoshiro256pp rng(2024);
  int roots = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 300);
    V y(n);
    const int kind = trial % 3;
    for (auto& v : y) v = kind == 0 ? rng.uniform() : kind == 1 ? rng.normal() : 0.0316 * rng.normal();
    const double r = rng.uniform(0.01, 5);
    const double ymin = -*std::max_element(y.begin(), y.end());
    const double ylow = -*std::min_element(y.begin(), y.end());
    const double lam0 = ymin + rng.uniform() * (ylow - ymin + 3 * r);
    const double lam_star = oracle::oracle_simplex(y, r).lambda;
    const double slack = 4e-15 * std::max(1.0, std::abs(lam_star));

    for (bool fixing : {true, false}) {
      SolverOptions<double> opts;
      opts.variable_fixing = fixing;
      std::vector<detail::IterateRecord<double>> tr;
      const auto out = newton_project_simplex_from<double>(y, r, lam0, opts, &tr);
      c.expect(out.solved() && !tr.empty(), [&] { return "trial " + std::to_string(trial) + ": not solved"; });
      if (tr.empty()) continue;
      if (tr[0].residual == 0) {
        ++roots;
        continue;
      }
      auto tag = [&](const char* p) {
        return "trial " + std::to_string(trial) + " fixing=" + std::to_string(fixing) + ": property " + p;
      };
      c.expect((tr[0].residual < 0 ? tr[0].dplus : tr[0].dminus) > 0, [&] { return tag("(a)"); });
      for (std::size_t k = 1; k < tr.size(); ++k) {
        c.expect(tr[k].lambda >= lam_star - slack, [&] { return tag("(b) lower"); });
        if (k + 1 < tr.size()) {
          c.expect(tr[k].lambda >= tr[k + 1].lambda, [&] { return tag("(b) monotone"); });
          c.expect(tr[k].residual > 0, [&] { return tag("(c)"); });
          c.expect(tr[k].dminus > 0, [&] { return tag("(d)"); });
        }
      }
    }
  }
  return report(3, "monotone Newton iterates on the simplex", c,
                std::to_string(roots / 2) + " starts were already roots", seconds_since(t0));
}

bool criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::ostringstream detail;
  for (Family fam : kCqk) {
    double total = 0;
    for (int k = 0; k < 20; ++k) {
      const auto inst = gen_cqk({fam, 1'000'000, static_cast<std::uint64_t>(1000 + k)});
      const auto out = solve_cqk(inst);
      c.expect(out.solved(), [&] { return std::string(family_name(fam)) + ": not solved"; });
      total += out.iterations;
    }
    const double mean = total / 20;
    detail << family_name(fam) << " mean " << mean << "; ";
    c.expect(mean >= 4 && mean <= 9, [&] { return std::string(family_name(fam)) + fmt(": mean %.2f", mean); });
  }
  return report(4, "knapsack iteration counts at n=1e6", c, detail.str() + "band [4, 9]", seconds_since(t0));
}

bool criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  ParallelOptions popts;
  popts.workers = default_workers();
  double jac = 0, nwt = 0;
  for (int k = 0; k < 20; ++k) {
    const V y = gen_simplex_y({Family::SimplexU01, 1'000'000, static_cast<std::uint64_t>(2000 + k)});
    const auto a = jacobi_project_simplex<double>(y, 1.0, {}, popts);
    const auto b = newton_project_simplex<double>(y, 1.0);
    c.expect(a.solved() && b.solved(), [] { return std::string("solve failed"); });
    jac += a.iterations;
    nwt += b.iterations;
  }
  jac /= 20;
  nwt /= 20;
  c.expect(jac >= 1.3 * nwt, [&] { return fmt("formula init %.2f vs sorted-pass init %.2f", jac, nwt); });
  return report(5, "initializer effect at n=1e6", c,
                fmt("mean iterations: formula init %.2f, simplex initializer %.2f", jac, nwt), seconds_since(t0));
}

bool criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  for (Family fam : kCqk) {
    for (int k = 0; k < 100; ++k) {
      const auto inst = gen_cqk({fam, 100'000, static_cast<std::uint64_t>(3000 + k)});
      const auto ref = solve_cqk(inst);
      const double ltol = 1e-9 * std::max(1.0, std::abs(ref.lambda));
      const double xtol = 1e-9 * std::max(1.0, testutil::inf_norm(ref.x));
      for (int w : {1, 2, 4, 8}) {
        ParallelOptions popts;
        popts.workers = w;
        const auto a = par_solve_cqk(inst, {}, popts);
        const auto b = par_solve_cqk(inst, {}, popts);
        auto tag = [&] {
          return std::string(family_name(fam)) + " seed=" + std::to_string(3000 + k) + " workers=" + std::to_string(w);
        };
        c.expect(std::abs(a.lambda - ref.lambda) <= ltol, [&] { return tag() + ": lambda differs"; });
        c.expect(testutil::max_abs_diff(a.x, ref.x) <= xtol, [&] { return tag() + ": x differs"; });
        c.expect(a.lambda == b.lambda && a.x == b.x && a.iterations == b.iterations,
                 [&] { return tag() + ": repeat not bit-identical"; });
      }
    }
  }
  return report(6, "parallel consistency at n=1e5", c, "3 classes x 100 seeds x workers {1,2,4,8}",
                seconds_since(t0));
}

/// Advisory only: prints WARN instead of FAIL and never fails the run.
void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const V y = gen_simplex_y({Family::SimplexU01, 10'000'000, 7});
  TimingBudget budget{5, 10.0};
  auto run = [&](int w) {
    ParallelOptions popts;
    popts.workers = w;
    return min_time_ms([&] { (void)par_project_simplex<double>(y, 1.0, {}, popts); }, budget);
  };
  const double t1 = run(1), t8 = run(8);
  const unsigned hw = std::thread::hardware_concurrency();
  const bool faster = t8 < t1;
  // Below 8 hardware threads the comparison is only logged.
  const char* verdict = hw >= 8 && faster ? "PASS" : "WARN";
  std::printf("criterion  7 %s: 8-worker vs 1-worker simplex at n=1e7 (advisory; %u hardware threads; "
              "1 worker %.1f ms, 8 workers %.1f ms; %.1fs)\n",
              verdict, hw, t1, t8, seconds_since(t0));
  if (hw < 8) std::printf("    fewer than 8 hardware threads: speedup not expected here\n");
  std::fflush(stdout);
}

bool criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  const auto ls = gen_sparse_ls(800, 10'000, 1e-2, 30, 11);
  double r = 0;
  for (double v : ls.x_true) r += std::abs(v);
  double mean[2] = {0, 0};
  int iters[2] = {0, 0};
  double pg[2] = {0, 0};
  for (int warm = 0; warm < 2; ++warm) {
    const auto prob = build_basis_pursuit(ls.A, ls.b, r, warm == 1);
    const auto res = spg_solve(prob, prob.x0, 1e-4, 50000);
    c.expect(res.converged && res.pg_norm < 1e-4, [&] {
      return std::string(warm ? "warm" : "cold") + fmt(": pg norm %.3g after %.0f iterations", res.pg_norm, res.iterations);
    });
    const std::size_t m = res.projections.size();
    const std::size_t from = m > 100 ? m - 100 : 0;
    for (std::size_t k = from; k < m; ++k) mean[warm] += res.projections[k].iterations;
    mean[warm] /= std::max<std::size_t>(1, m - from);
    iters[warm] = res.iterations;
    pg[warm] = res.pg_norm;
  }
  c.expect(mean[1] <= mean[0], [&] { return fmt("warm mean %.3f > cold mean %.3f", mean[1], mean[0]); });
  std::ostringstream detail;
  detail << "mean inner iterations over the last 100 steps: warm " << mean[1] << ", cold " << mean[0]
         << "; SPG iterations warm " << iters[1] << ", cold " << iters[0] << "; pg " << pg[1] << " / " << pg[0];
  return report(8, "warm-started l1 projections inside SPG", c, detail.str(), seconds_since(t0));
}

bool criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  Xoshiro256pp rng(99);
  int inside = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 500);
    V y(n);
    for (auto& v : y) v = rng.uniform() < 0.1 ? 0.0 : rng.normal() * (rng.uniform() < 0.5 ? 1.0 : 1e-3);
    double norm1 = 0;
    for (double v : y) norm1 += std::abs(v);
    const double r = rng.uniform(0.02, 1.5) * std::max(norm1, 1e-3);
    const auto out = project_l1<double>(y, r);
    const auto tag = [&](const char* m) { return "trial " + std::to_string(t) + ": " + m; };
    if (norm1 <= r) {
      ++inside;
      c.expect(out.x == y, [&] { return tag("point inside the ball was changed"); });
      continue;
    }
    double got = 0;
    for (std::size_t i = 0; i < n; ++i) {
      got += std::abs(out.x[i]);
      c.expect(std::abs(out.x[i]) <= std::abs(y[i]), [&] { return tag("magnitude exceeds |y_i|"); });
      c.expect(out.x[i] == 0 || std::signbit(out.x[i]) == std::signbit(y[i]), [&] { return tag("sign flipped"); });
      c.expect(y[i] != 0 || out.x[i] == 0, [&] { return tag("zero input became nonzero"); });
    }
    // Order of magnitudes is preserved.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(y[a]) < std::abs(y[b]); });
    for (std::size_t k = 1; k < n; ++k)
      c.expect(std::abs(out.x[idx[k]]) >= std::abs(out.x[idx[k - 1]]), [&] { return tag("magnitude order broken"); });
    c.expect(std::abs(got - r) <= 1e-10 * (norm1 + r),
             [&] { return tag("") + fmt("|x|_1 - r = %.3g", got - r); });
  }
  return report(9, "l1 reduction correctness", c, std::to_string(inside) + " of 10000 points were inside the ball",
                seconds_since(t0));
}

}  // namespace

int main() {
  std::printf("acceptance run, tau = %.3g, %d default workers\n", kTau, default_workers());
  std::fflush(stdout);
  Check calib;
  bool ok = true;
  ok &= criterion1(calib);
  ok &= criterion2(calib);
  ok &= criterion3();
  ok &= criterion4();
  ok &= criterion5();
  ok &= criterion6();
  criterion7();
  ok &= criterion8();
  ok &= criterion9();
  ok &= report(10, "stopping-criterion calibration", calib, "residual test re-run on every oracle-suite answer",
               0.0);
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
