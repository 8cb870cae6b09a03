#include "cqk/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cqk {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) noexcept {
  for (auto& w : s_) w = splitmix64(seed);
}

Xoshiro256pp Xoshiro256pp::from_state(const std::array<std::uint64_t, 4>& state) noexcept {
  Xoshiro256pp g;
  g.s_ = state;
  return g;
}

Xoshiro256pp::result_type Xoshiro256pp::operator()() noexcept {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Xoshiro256pp::normal() noexcept {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  return u * f;
}

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::CqkUncorrelated: return "cqk-uncorrelated";
    case Family::CqkWeaklyCorrelated: return "cqk-weak";
    case Family::CqkCorrelated: return "cqk-correlated";
    case Family::SimplexU01: return "simplex-u01";
    case Family::SimplexN01: return "simplex-n01";
    case Family::SimplexN0m3: return "simplex-n0m3";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view s) noexcept {
  for (Family f : {Family::CqkUncorrelated, Family::CqkWeaklyCorrelated, Family::CqkCorrelated,
                   Family::SimplexU01, Family::SimplexN01, Family::SimplexN0m3})
    if (s == family_name(f)) return f;
  if (s == "cqk1") return Family::CqkUncorrelated;
  if (s == "cqk2") return Family::CqkWeaklyCorrelated;
  if (s == "cqk3") return Family::CqkCorrelated;
  return std::nullopt;
}

bool is_cqk_family(Family f) noexcept {
  return f == Family::CqkUncorrelated || f == Family::CqkWeaklyCorrelated ||
         f == Family::CqkCorrelated;
}

Instance<double> gen_cqk(const GeneratorSpec& spec) {
  if (!is_cqk_family(spec.family))
    throw FamilyMismatch("gen_cqk: " + std::string(family_name(spec.family)) +
                         " is not a knapsack family");
  if (spec.n == 0) throw DomainError("n", DomainError::npos, "must be at least 1");
  const std::size_t n = spec.n;
  Xoshiro256pp rng(spec.seed);
  Instance<double> inst;
  for (auto* v : {&inst.d, &inst.a, &inst.b, &inst.l, &inst.u}) v->resize(n);

  double btl = 0, btu = 0;
  for (std::size_t i = 0; i < n; ++i) {
    switch (spec.family) {
      case Family::CqkUncorrelated:
        inst.d[i] = rng.uniform(10, 25);
        inst.a[i] = rng.uniform(10, 25);
        inst.b[i] = rng.uniform(10, 25);
        break;
      case Family::CqkWeaklyCorrelated:
        inst.b[i] = rng.uniform(10, 25);
        inst.d[i] = rng.uniform(inst.b[i] - 5, inst.b[i] + 5);
        inst.a[i] = rng.uniform(inst.b[i] - 5, inst.b[i] + 5);
        break;
      default:
        inst.b[i] = rng.uniform(10, 25);
        inst.d[i] = inst.b[i] + 5;
        inst.a[i] = inst.d[i];
        break;
    }
    const double p = rng.uniform(10, 25);
    const double q = rng.uniform(10, 25);
    inst.l[i] = std::min(p, q);
    inst.u[i] = std::max(p, q);
    btl += inst.b[i] * inst.l[i];
    btu += inst.b[i] * inst.u[i];
  }
  inst.r = std::clamp(rng.uniform(btl, btu), btl, btu);
  return inst;
}

std::vector<double> gen_simplex_y(const GeneratorSpec& spec) {
  if (is_cqk_family(spec.family))
    throw FamilyMismatch("gen_simplex_y: " + std::string(family_name(spec.family)) +
                         " is not a simplex family");
  if (spec.n == 0) throw DomainError("n", DomainError::npos, "must be at least 1");
  Xoshiro256pp rng(spec.seed);
  const double sd = std::sqrt(1e-3);
  std::vector<double> y(spec.n);
  for (;;) {
    bool has_zero = false;
    for (auto& v : y) {
      switch (spec.family) {
        case Family::SimplexU01: v = rng.uniform(); break;
        case Family::SimplexN01: v = rng.normal(); break;
        default: v = sd * rng.normal(); break;
      }
      has_zero = has_zero || v == 0;
    }
    if (!has_zero) return y;
  }
}

SimplexInstance<double> gen_simplex(const GeneratorSpec& spec, double r) {
  return {gen_simplex_y(spec), r};
}

Blobs gen_blobs(std::size_t n, std::size_t dim, double separation, std::uint64_t seed) {
  if (n == 0 || dim == 0) throw DomainError("size", DomainError::npos, "n and dim must be positive");
  Xoshiro256pp rng(seed);
  Blobs out{n, dim, std::vector<double>(n * dim), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double label = i % 2 == 0 ? 1.0 : -1.0;
    out.labels[i] = label;
    for (std::size_t k = 0; k < dim; ++k) out.points[i * dim + k] = rng.normal();
    out.points[i * dim] += label * separation / 2;
  }
  return out;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& out) const {
  out.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0;
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += values[p] * x[col_idx[p]];
    out[i] = s;
  }
}

void SparseMatrix::multiply_transpose(const std::vector<double>& y, std::vector<double>& out) const {
  out.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) out[col_idx[p]] += values[p] * y[i];
}

SparseLeastSquares gen_sparse_ls(std::size_t m, std::size_t n, double density, std::size_t k,
                                 std::uint64_t seed) {
  if (!(density > 0 && density <= 1)) throw DomainError("density", DomainError::npos, "must lie in (0, 1]");
  if (m == 0 || n == 0) throw DomainError("size", DomainError::npos, "m and n must be positive");
  if (k > n) throw DomainError("k", DomainError::npos, "exceeds n");
  Xoshiro256pp rng(seed);
  SparseLeastSquares out;
  auto& A = out.A;
  A.rows = m;
  A.cols = n;
  A.row_ptr.reserve(m + 1);
  A.row_ptr.push_back(0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m) * density);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() >= density) continue;
      A.col_idx.push_back(j);
      A.values.push_back(scale * rng.normal());
    }
    A.row_ptr.push_back(A.col_idx.size());
  }

  // Partial Fisher-Yates for k distinct support indices.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  out.x_true.assign(n, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - t));
    std::swap(perm[t], perm[std::min(j, n - 1)]);
    double v;
    do v = rng.normal();
    while (v == 0);
    out.x_true[perm[t]] = v;
  }
  A.multiply(out.x_true, out.b);
  return out;
}

}  // namespace cqk
