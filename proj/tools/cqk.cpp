// Command-line front end: gen, solve, bench, spg.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "cqk/instances.hpp"
#include "cqk/io.hpp"
#include "cqk/newton.hpp"
#include "cqk/parallel.hpp"
#include "cqk/simplex.hpp"
#include "cqk/spg.hpp"
#include "cqk/timing.hpp"

using namespace cqk;

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Family require_family(const std::string& name) {
  auto f = parse_family(name);
  if (!f) throw UsageError("unknown family '" + name + "'");
  return *f;
}

AnyInstance generate(Family f, std::size_t n, std::uint64_t seed, double radius) {
  if (is_cqk_family(f)) return gen_cqk({f, n, seed});
  return gen_simplex({f, n, seed}, radius);
}

std::vector<double> read_vector_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open " + path);
  std::vector<double> v;
  std::string tok;
  while (is >> tok) {
    double x;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw UsageError("malformed value '" + tok + "' in " + path);
    v.push_back(x);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Solving

enum class Variant { Newton, NewtonNoFix, Condat, Jacobi, Parallel };

const std::map<std::string, Variant> kVariants{{"newton", Variant::Newton},
                                               {"newton-nofix", Variant::NewtonNoFix},
                                               {"condat", Variant::Condat},
                                               {"jacobi", Variant::Jacobi},
                                               {"parallel", Variant::Parallel}};

struct SolveRequest {
  Variant variant = Variant::Newton;
  int workers = 1;
  OutputKind output = OutputKind::Dense;
  bool l1 = false;
};

template <std::floating_point T>
SolveOutcome<T> from_condat(CondatResult<T> c, OutputKind output) {
  SolveOutcome<T> out;
  out.lambda = c.lambda;
  out.iterations = c.sweeps;
  out.n = c.x.size();
  out.output = output;
  if (output == OutputKind::Dense) {
    out.x = std::move(c.x);
  } else {
    for (std::size_t i = 0; i < c.x.size(); ++i)
      if (c.x[i] != 0) out.x_sparse.push_back({i, c.x[i]});
  }
  return out;
}

template <std::floating_point T>
SolveOutcome<T> solve_knapsack(const Instance<T>& in, const SolveRequest& req,
                               std::optional<std::span<const T>> warm) {
  SolverOptions<T> opts;
  opts.output = req.output;
  ParallelOptions popts;
  popts.workers = req.workers;
  switch (req.variant) {
    case Variant::Newton: return solve_cqk(in, opts, warm);
    case Variant::NewtonNoFix:
      opts.variable_fixing = false;
      return solve_cqk(in, opts, warm);
    case Variant::Jacobi: return jacobi_solve(in, opts, popts);
    case Variant::Parallel: return par_solve_cqk(in, opts, popts, warm);
    case Variant::Condat: break;
  }
  throw UsageError("variant condat applies to simplex instances only");
}

template <std::floating_point T>
SolveOutcome<T> condat_l1(std::span<const T> y, T r, OutputKind output) {
  T norm1{};
  for (T v : y) norm1 += std::abs(v);
  std::vector<T> mag(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) mag[i] = std::abs(y[i]);
  CondatResult<T> c;
  if (norm1 <= r) {
    c.x.assign(y.begin(), y.end());
  } else {
    c = condat_project_full<T>(mag, r);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] < 0 && c.x[i] != 0) c.x[i] = -c.x[i];
  }
  return from_condat(std::move(c), output);
}

template <std::floating_point T>
SolveOutcome<T> solve_simplex(std::span<const T> y, T r, const SolveRequest& req,
                              std::optional<std::span<const T>> warm) {
  SolverOptions<T> opts;
  opts.output = req.output;
  ParallelOptions popts;
  popts.workers = req.workers;
  if (req.l1) {
    switch (req.variant) {
      case Variant::Newton: return project_l1(y, r, opts, warm);
      case Variant::NewtonNoFix:
        opts.variable_fixing = false;
        return project_l1(y, r, opts, warm);
      case Variant::Condat: return condat_l1(y, r, req.output);
      default: throw UsageError("l1 projection supports the newton, newton-nofix and condat variants");
    }
  }
  switch (req.variant) {
    case Variant::Newton: return newton_project_simplex(y, r, opts, warm);
    case Variant::NewtonNoFix:
      opts.variable_fixing = false;
      return newton_project_simplex(y, r, opts, warm);
    case Variant::Condat: return from_condat(condat_project_full(y, r), req.output);
    case Variant::Jacobi: return jacobi_project_simplex(y, r, opts, popts);
    case Variant::Parallel: return par_project_simplex(y, r, opts, popts, warm);
  }
  throw UsageError("unknown variant");
}

/// An instance held at working precision T.
template <std::floating_point T>
struct Prepared {
  std::variant<Instance<T>, SimplexInstance<T>> inst;
  std::vector<T> warm;

  SolveOutcome<T> run(const SolveRequest& req) const {
    std::optional<std::span<const T>> w;
    if (!warm.empty()) w = std::span<const T>(warm);
    if (const auto* k = std::get_if<Instance<T>>(&inst)) return solve_knapsack(*k, req, w);
    const auto& s = std::get<SimplexInstance<T>>(inst);
    return solve_simplex(std::span<const T>(s.y), s.r, req, w);
  }
};

template <std::floating_point T>
Prepared<T> prepare(const AnyInstance& any, const std::vector<double>& warm) {
  Prepared<T> p;
  if (const auto* k = std::get_if<Instance<double>>(&any)) {
    validate(*k);
    p.inst = convert_precision<T>(*k);
  } else {
    const auto& s = std::get<SimplexInstance<double>>(any);
    validate(s);
    p.inst = SimplexInstance<T>{std::vector<T>(s.y.begin(), s.y.end()), static_cast<T>(s.r)};
  }
  const std::size_t n = std::visit([](const auto& v) { return v.size(); }, any);
  if (!warm.empty() && warm.size() != n)
    throw UsageError("warm-start vector has length " + std::to_string(warm.size()) + ", expected " +
                     std::to_string(n));
  p.warm.assign(warm.begin(), warm.end());
  return p;
}

template <std::floating_point T>
int run_solve(const AnyInstance& any, const std::vector<double>& warm, const SolveRequest& req,
              const std::string& out_path) {
  const auto prepared = prepare<T>(any, warm);
  const auto t0 = std::chrono::steady_clock::now();
  const auto out = prepared.run(req);
  const auto t1 = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  if (!out.solved()) {
    std::cout << "status: infeasible\n";
    std::cout << "iterations: " << out.iterations << "\nphi_evals: " << out.phi_evals << "\n";
    std::cout << "time_ms: " << ms << "\n";
    return kExitInfeasible;
  }
  std::cout << "status: solved\n";
  std::cout << "lambda: " << fmt_double(static_cast<double>(out.lambda)) << "\n";
  std::cout << "iterations: " << out.iterations << "\nphi_evals: " << out.phi_evals << "\n";
  std::cout << "fixed: " << out.fixed_count << "\n";
  std::cout << "time_ms: " << ms << "\n";
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) throw UsageError("cannot open " + out_path + " for writing");
    if (out.output == OutputKind::Dense) {
      for (T v : out.x) os << fmt_double(static_cast<double>(v)) << '\n';
    } else {
      for (const auto& e : out.x_sparse) os << e.index << ' ' << fmt_double(static_cast<double>(e.value)) << '\n';
    }
  }
  return kExitSolved;
}

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchRow {
  std::string suite, family;
  std::size_t n;
  std::string variant;
  int workers;
  int precision;
  double median_ms;
  double mean_iters;
  double relperf = std::numeric_limits<double>::quiet_NaN();
};

struct BenchConfig {
  std::string suite;
  std::vector<std::size_t> sizes;
  int instances = 20;
  TimingBudget budget;
  std::vector<std::string> variants;
  std::vector<int> workers;
  int precision = 64;
};

bool uses_workers(const std::string& variant) { return variant == "jacobi" || variant == "parallel"; }

std::string base_variant(const std::string& suite) {
  if (suite == "cqk") return "newton";
  if (suite == "svm" || suite == "bp") return "cold";
  return "condat";
}

std::vector<std::string> default_variants(const std::string& suite) {
  if (suite == "cqk") return {"newton", "newton-nofix", "jacobi", "parallel"};
  if (suite == "simplex") return {"condat", "newton", "newton-nofix", "jacobi", "parallel"};
  if (suite == "l1") return {"condat", "newton", "newton-nofix"};
  return {"cold", "warm"};
}

std::vector<std::string> suite_families(const std::string& suite) {
  if (suite == "cqk") return {"cqk-uncorrelated", "cqk-weak", "cqk-correlated"};
  if (suite == "simplex" || suite == "l1") return {"simplex-u01", "simplex-n01", "simplex-n0m3"};
  if (suite == "svm") return {"blobs"};
  return {"sparse-ls"};
}

template <std::floating_point T>
void bench_projection_cell(const BenchConfig& cfg, const std::string& family, std::size_t n,
                           const std::string& variant, int workers, std::vector<BenchRow>& rows) {
  const Family fam = require_family(family);
  SolveRequest req;
  req.variant = kVariants.at(variant);
  req.workers = workers;
  req.l1 = cfg.suite == "l1";
  std::vector<double> times;
  double iters = 0;
  for (int k = 0; k < cfg.instances; ++k) {
    const auto seed = static_cast<std::uint64_t>(k + 1);
    AnyInstance any = generate(fam, n, seed, kDefaultSimplexRadius);
    if (req.l1) {
      // Radius half the l1 norm so the projection is never the identity.
      auto& s = std::get<SimplexInstance<double>>(any);
      double norm1 = 0;
      for (double v : s.y) norm1 += std::abs(v);
      s.r = norm1 / 2;
    }
    const auto prepared = prepare<T>(any, {});
    SolveOutcome<T> last;
    times.push_back(min_time_ms([&] { last = prepared.run(req); }, cfg.budget));
    iters += last.iterations;
  }
  rows.push_back({cfg.suite, family, n, variant, workers, cfg.precision, median(times), iters / cfg.instances});
}

void bench_spg_cell(const BenchConfig& cfg, std::size_t n, const std::string& variant,
                    std::vector<BenchRow>& rows) {
  const bool warm = variant == "warm";
  std::vector<double> times;
  double iters = 0;
  for (int k = 0; k < cfg.instances; ++k) {
    const auto seed = static_cast<std::uint64_t>(k + 1);
    SpgProblem prob;
    if (cfg.suite == "svm") {
      auto blobs = gen_blobs(n, 20, 3.0, seed);
      prob = build_svm_dual(blobs.points, 20, blobs.labels, 1.0 / 20, 1.0, warm);
    } else {
      const std::size_t m = std::max<std::size_t>(1, n * 2 / 25);
      auto ls = gen_sparse_ls(m, n, 1e-2, std::max<std::size_t>(1, n * 3 / 1000), seed);
      double r = 0;
      for (double v : ls.x_true) r += std::abs(v);
      prob = build_basis_pursuit(ls.A, ls.b, r, warm);
    }
    SpgResult last;
    times.push_back(min_time_ms([&] { last = spg_solve(prob, prob.x0, 1e-4, 20000); }, cfg.budget));
    double s = 0;
    for (const auto& p : last.projections) s += p.iterations;
    iters += last.projections.empty() ? 0 : s / last.projections.size();
  }
  rows.push_back({cfg.suite, cfg.suite == "svm" ? "blobs" : "sparse-ls", n, variant, 1, 64, median(times),
                  iters / cfg.instances});
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  const bool spg = cfg.suite == "svm" || cfg.suite == "bp";
  auto variants = cfg.variants.empty() ? default_variants(cfg.suite) : cfg.variants;
  const std::string base = base_variant(cfg.suite);
  if (std::find(variants.begin(), variants.end(), base) == variants.end()) variants.insert(variants.begin(), base);
  for (const auto& v : variants) {
    const bool known = spg ? (v == "warm" || v == "cold") : kVariants.count(v) > 0;
    if (!known) throw UsageError("variant '" + v + "' is not available for suite " + cfg.suite);
    if (cfg.suite == "cqk" && v == "condat") throw UsageError("condat applies to the simplex suites only");
    if (cfg.suite == "l1" && uses_workers(v)) throw UsageError("suite l1 supports newton, newton-nofix and condat");
  }

  for (std::size_t n : cfg.sizes) {
    for (const auto& family : suite_families(cfg.suite)) {
      const std::size_t first = rows.size();
      for (const auto& v : variants) {
        if (spg) {
          bench_spg_cell(cfg, n, v, rows);
          continue;
        }
        std::vector<int> ws = uses_workers(v) ? cfg.workers : std::vector<int>{1};
        for (int w : ws) {
          if (cfg.precision == 32)
            bench_projection_cell<float>(cfg, family, n, v, w, rows);
          else
            bench_projection_cell<double>(cfg, family, n, v, w, rows);
        }
      }
      double base_ms = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = first; i < rows.size(); ++i)
        if (rows[i].variant == base && rows[i].workers == 1) base_ms = rows[i].median_ms;
      for (std::size_t i = first; i < rows.size(); ++i) rows[i].relperf = base_ms / rows[i].median_ms;
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "suite,family,n,variant,workers,precision,median_min_ms,mean_iters,relperf_vs_base\n";
  for (const auto& r : rows)
    os << r.suite << ',' << r.family << ',' << r.n << ',' << r.variant << ',' << r.workers << ','
       << r.precision << ',' << std::setprecision(6) << r.median_ms << ',' << r.mean_iters << ','
       << r.relperf << '\n';
}

void print_bench_table(const std::vector<BenchRow>& rows) {
  std::cout << std::left << std::setw(8) << "suite" << std::setw(18) << "family" << std::setw(10) << "n"
            << std::setw(14) << "variant" << std::setw(8) << "workers" << std::setw(14) << "median_ms"
            << std::setw(10) << "iters" << "relperf\n";
  for (const auto& r : rows)
    std::cout << std::left << std::setw(8) << r.suite << std::setw(18) << r.family << std::setw(10) << r.n
              << std::setw(14) << r.variant << std::setw(8) << r.workers << std::setw(14) << std::setprecision(5)
              << r.median_ms << std::setw(10) << r.mean_iters << r.relperf << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous quadratic knapsack and simplex projection solvers"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate an instance file");
  std::string gen_family, gen_out, gen_format = "text";
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  double gen_radius = kDefaultSimplexRadius;
  gen->add_option("--family", gen_family, "Instance family")->required();
  gen->add_option("--n", gen_n, "Number of variables")->required();
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--radius", gen_radius, "Simplex level r for simplex families");
  gen->add_option("--format", gen_format, "text or binary")->check(CLI::IsMember({"text", "binary"}));
  gen->add_option("--out", gen_out, "Output file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one instance");
  std::string s_instance, s_family, s_variant = "newton", s_warm, s_output = "dense", s_out;
  std::size_t s_n = 0;
  std::uint64_t s_seed = 0;
  double s_radius = kDefaultSimplexRadius;
  int s_workers = 0, s_precision = 64;
  bool s_l1 = false;
  auto* inst_opt = solve->add_option("--instance", s_instance, "Instance file");
  auto* fam_opt = solve->add_option("--family", s_family, "Generate from this family instead of a file");
  solve->add_option("--n", s_n, "Number of variables for --family");
  solve->add_option("--seed", s_seed, "Seed for --family");
  solve->add_option("--radius", s_radius, "Simplex level for generated simplex instances");
  inst_opt->excludes(fam_opt);
  solve->add_option("--variant", s_variant, "newton, newton-nofix, condat, jacobi or parallel")
      ->check(CLI::IsMember({"newton", "newton-nofix", "condat", "jacobi", "parallel"}));
  solve->add_option("--workers", s_workers, "Worker threads (default: CQK_WORKERS or all cores)");
  solve->add_option("--warm", s_warm, "File with a primal estimate for warm starting");
  solve->add_option("--output", s_output, "dense or sparse")->check(CLI::IsMember({"dense", "sparse"}));
  solve->add_option("--precision", s_precision, "32 or 64")->check(CLI::IsMember({32, 64}));
  solve->add_flag("--l1", s_l1, "Project a simplex instance's y onto the l1 ball of radius r");
  solve->add_option("--out", s_out, "Write the solution vector to this file");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  BenchConfig cfg;
  std::string b_sizes = "10000", b_variants, b_workers, b_csv, b_budget;
  bench->add_option("--suite", cfg.suite, "cqk, simplex, l1, svm or bp")
      ->required()
      ->check(CLI::IsMember({"cqk", "simplex", "l1", "svm", "bp"}));
  bench->add_option("--sizes", b_sizes, "Comma-separated problem sizes");
  bench->add_option("--instances", cfg.instances, "Instances per cell")->check(CLI::PositiveNumber);
  bench->add_option("--reps-budget", b_budget, "RUNS,SECONDS per instance (default 10000,2)");
  bench->add_option("--variants", b_variants, "Comma-separated variants");
  bench->add_option("--workers", b_workers, "Comma-separated worker counts for parallel variants");
  bench->add_option("--precision", cfg.precision, "32 or 64")->check(CLI::IsMember({32, 64}));
  bench->add_option("--csv", b_csv, "Write results as CSV");

  // spg
  auto* spgc = app.add_subcommand("spg", "Run the spectral projected gradient demo");
  std::string p_app = "svm", p_warm = "on", p_csv;
  std::size_t p_n = 1000;
  std::uint64_t p_seed = 1;
  double p_gamma = 0.05, p_C = 1.0, p_radius = 0, p_tol = 1e-4;
  int p_max_iter = 20000;
  spgc->add_option("--app", p_app, "svm or bp")->check(CLI::IsMember({"svm", "bp"}));
  spgc->add_option("--n", p_n, "Number of variables");
  spgc->add_option("--seed", p_seed, "Random seed");
  spgc->add_option("--gamma", p_gamma, "RBF kernel width (svm)");
  spgc->add_option("--C", p_C, "Box bound (svm)");
  spgc->add_option("--radius", p_radius, "l1 radius (bp; default: l1 norm of the planted solution)");
  spgc->add_option("--tol", p_tol, "Projected-gradient tolerance");
  spgc->add_option("--max-iter", p_max_iter, "Iteration limit");
  spgc->add_option("--warm", p_warm, "on or off")->check(CLI::IsMember({"on", "off"}));
  spgc->add_option("--csv", p_csv, "Per-iteration projection statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const AnyInstance inst = generate(require_family(gen_family), gen_n, gen_seed, gen_radius);
      write_instance_file(gen_out, inst, gen_format == "binary" ? FileFormat::Binary : FileFormat::Text);
      return kExitSolved;
    }

    if (solve->parsed()) {
      AnyInstance any;
      if (!s_instance.empty()) {
        any = read_instance_file(s_instance);
      } else if (!s_family.empty()) {
        if (s_n == 0) throw UsageError("--n is required with --family");
        any = generate(require_family(s_family), s_n, s_seed, s_radius);
      } else {
        throw UsageError("either --instance or --family is required");
      }
      if (s_l1 && !std::holds_alternative<SimplexInstance<double>>(any))
        throw UsageError("--l1 needs a simplex instance");
      SolveRequest req;
      req.variant = kVariants.at(s_variant);
      req.workers = s_workers > 0 ? s_workers : default_workers();
      req.output = s_output == "sparse" ? OutputKind::Sparse : OutputKind::Dense;
      req.l1 = s_l1;
      const auto warm = s_warm.empty() ? std::vector<double>{} : read_vector_file(s_warm);
      return s_precision == 32 ? run_solve<float>(any, warm, req, s_out) : run_solve<double>(any, warm, req, s_out);
    }

    if (bench->parsed()) {
      for (const auto& s : split_list(b_sizes)) cfg.sizes.push_back(std::stoul(s));
      cfg.variants = split_list(b_variants);
      if (b_workers.empty())
        cfg.workers = {default_workers()};
      else
        for (const auto& w : split_list(b_workers)) cfg.workers.push_back(std::stoi(w));
      for (int w : cfg.workers)
        if (w < 1) throw UsageError("worker counts must be positive");
      if (!b_budget.empty()) {
        const auto parts = split_list(b_budget);
        if (parts.size() != 2) throw UsageError("--reps-budget expects RUNS,SECONDS");
        cfg.budget.max_runs = std::stoi(parts[0]);
        cfg.budget.max_seconds = std::stod(parts[1]);
      }
      const auto rows = run_bench(cfg);
      print_bench_table(rows);
      if (!b_csv.empty()) {
        std::ofstream os(b_csv);
        if (!os) throw UsageError("cannot open " + b_csv);
        write_bench_csv(os, rows);
      }
      return kExitSolved;
    }

    if (spgc->parsed()) {
      SpgProblem prob;
      const bool warm = p_warm == "on";
      if (p_app == "svm") {
        auto blobs = gen_blobs(p_n, 20, 3.0, p_seed);
        prob = build_svm_dual(blobs.points, 20, blobs.labels, p_gamma, p_C, warm);
      } else {
        const std::size_t m = std::max<std::size_t>(1, p_n * 2 / 25);
        auto ls = gen_sparse_ls(m, p_n, 1e-2, std::max<std::size_t>(1, p_n * 3 / 1000), p_seed);
        double r = p_radius;
        if (r <= 0)
          for (double v : ls.x_true) r += std::abs(v);
        prob = build_basis_pursuit(ls.A, ls.b, r, warm);
      }
      const auto t0 = std::chrono::steady_clock::now();
      const auto res = spg_solve(prob, prob.x0, p_tol, p_max_iter);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      double mean = 0;
      for (const auto& p : res.projections) mean += p.iterations;
      if (!res.projections.empty()) mean /= res.projections.size();
      std::cout << "converged: " << (res.converged ? "yes" : "no") << "\n";
      std::cout << "iterations: " << res.iterations << "\n";
      std::cout << "pg_norm: " << res.pg_norm << "\n";
      std::cout << "objective: " << fmt_double(res.objective.back()) << "\n";
      std::cout << "mean_projection_iterations: " << mean << "\n";
      std::cout << "time_ms: " << ms << "\n";
      if (!p_csv.empty()) {
        std::ofstream os(p_csv);
        if (!os) throw UsageError("cannot open " + p_csv);
        os << "iteration,projection_iterations,projection_phi_evals,warm,objective\n";
        for (std::size_t k = 0; k < res.projections.size(); ++k)
          os << k + 1 << ',' << res.projections[k].iterations << ',' << res.projections[k].phi_evals << ','
             << (res.projections[k].warm ? 1 : 0) << ',' << fmt_double(res.objective[k + 1]) << '\n';
      }
      return res.converged ? kExitSolved : kExitUsage;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
