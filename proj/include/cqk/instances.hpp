#pragma once

// Seeded generators for the benchmark families and the synthetic SPG data.
//
// Stream semantics: a Xoshiro256++ state seeded from splitmix64(seed).
// Uniform draws take the top 53 bits of one output; normal draws use the
// polar method and keep the second variate for the next call. For the CQK
// classes each index draws its coefficients in recipe order (class 1: d, a, b;
// class 2: b, d, a; class 3: b) followed by its two bound draws, and r is
// drawn after the last index.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqk/core.hpp"

namespace cqk {

class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept;
  static Xoshiro256pp from_state(const std::array<std::uint64_t, 4>& state) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept;

  /// Uniform on [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;

 private:
  Xoshiro256pp() = default;
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_;
};

enum class Family {
  CqkUncorrelated,
  CqkWeaklyCorrelated,
  CqkCorrelated,
  SimplexU01,
  SimplexN01,
  SimplexN0m3,
};

std::string_view family_name(Family f) noexcept;
/// Accepts the names from family_name plus the short forms cqk1..cqk3.
std::optional<Family> parse_family(std::string_view s) noexcept;
bool is_cqk_family(Family f) noexcept;

struct GeneratorSpec {
  Family family = Family::CqkUncorrelated;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

class FamilyMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Instance<double> gen_cqk(const GeneratorSpec& spec);
std::vector<double> gen_simplex_y(const GeneratorSpec& spec);
/// Simplex level used when a simplex family is generated without one.
inline constexpr double kDefaultSimplexRadius = 1.0;
SimplexInstance<double> gen_simplex(const GeneratorSpec& spec, double r = kDefaultSimplexRadius);

struct Blobs {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> points;  // row-major n x dim
  std::vector<double> labels;  // +1 / -1
};

/// Two unit-covariance Gaussian clouds whose means differ by `separation`
/// along the first axis. Labels alternate +1, -1.
Blobs gen_blobs(std::size_t n, std::size_t dim, double separation, std::uint64_t seed);

/// Compressed sparse row matrix.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }
  void multiply(const std::vector<double>& x, std::vector<double>& out) const;
  void multiply_transpose(const std::vector<double>& y, std::vector<double>& out) const;
};

struct SparseLeastSquares {
  SparseMatrix A;
  std::vector<double> b;
  std::vector<double> x_true;
};

/// A with i.i.d. Bernoulli(density) pattern and N(0, 1/(m density)) values,
/// x_true with exactly k nonzeros, b = A x_true.
SparseLeastSquares gen_sparse_ls(std::size_t m, std::size_t n, double density, std::size_t k,
                                 std::uint64_t seed);

}  // namespace cqk
