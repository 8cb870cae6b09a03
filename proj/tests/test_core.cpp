#include <cmath>
#include <limits>
#include <vector>

#include "cqk/core.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cqk;
using testutil::kInf;

TEST_SUITE("core") {

TEST_CASE("validate accepts a well-formed instance") {
  Instance<double> in{{1, 1}, {0, 0}, {1, 1}, {0, 0}, {1, 1}, 1};
  CHECK_NOTHROW(validate(in));
}

TEST_CASE("validate reports the offending field and index") {
  Instance<double> in{{1, -1}, {0, 0}, {1, 1}, {0, 0}, {1, 1}, 1};
  try {
    validate(in);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.field() == "d");
    CHECK(e.index() == 1);
  }

  Instance<double> box{{1}, {0}, {1}, {2}, {1}, 1};
  try {
    validate(box);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.field() == "bounds");
    CHECK(e.index() == 0);
  }
}

TEST_CASE("validate rejects the remaining invariants") {
  auto base = testutil::two_var();
  auto bad = base;
  bad.b[0] = 0;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = base;
  bad.a[1] = std::nan("");
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = base;
  bad.l[0] = kInf;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = base;
  bad.u[0] = -kInf;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = base;
  bad.r = kInf;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = base;
  bad.u.pop_back();
  CHECK_THROWS_AS(validate(bad), DomainError);
  CHECK_THROWS_AS(validate(Instance<double>{}), DomainError);

  CHECK_THROWS_AS(validate(SimplexInstance<double>{{1.0}, 0.0}), DomainError);
  CHECK_NOTHROW(validate(SimplexInstance<double>{{-1.0, 2.0}, 0.5}));
}

TEST_CASE("eval_x") {
  auto in = testutil::two_var();
  auto x = eval_x(in, 2.0 / 3.0);
  CHECK(x[0] == doctest::Approx(2.0 / 3.0));
  CHECK(x[1] == doctest::Approx(1.0 / 3.0));

  x = eval_x(in, 100.0);
  CHECK(x == in.u);

  auto s = testutil::simplex_as_cqk({1, 2, 3}, 1);
  CHECK(eval_x(s, -2.0) == std::vector<double>{0, 0, 1});
}

TEST_CASE("eval_phi") {
  auto s = testutil::simplex_as_cqk({1, 2, 3}, 1);
  auto p = eval_phi(s, -2.0);
  CHECK(p.value == 1.0);
  CHECK(p.dplus == 2.0);
  CHECK(p.dminus == 1.0);

  auto in = testutil::two_var();
  p = eval_phi(in, -5.0);
  CHECK(p.value == 0.0);
  CHECK(p.dplus == 0.0);
  CHECK(p.dminus == 0.0);

  p = eval_phi(in, 2.0 / 3.0);
  CHECK(p.value == doctest::Approx(1.0));
  CHECK(p.dplus == 1.5);
  CHECK(p.dminus == 1.5);
}

TEST_CASE("eval_phi tie handling at breakpoints") {
  // Breakpoints 0 (lower) and 1 (upper) for the first variable.
  Instance<double> in{{1}, {0}, {1}, {0}, {1}, 0.5};
  auto at_lo = eval_phi(in, 0.0);
  CHECK(at_lo.dplus == 1.0);
  CHECK(at_lo.dminus == 0.0);
  auto at_hi = eval_phi(in, 1.0);
  CHECK(at_hi.dplus == 0.0);
  CHECK(at_hi.dminus == 1.0);

  // Degenerate box: both breakpoints at 0, no slope on either side.
  Instance<double> fixed{{1}, {0}, {1}, {0}, {0}, 0};
  auto z = eval_phi(fixed, 0.0);
  CHECK(z.dplus == 0.0);
  CHECK(z.dminus == 0.0);
}

TEST_CASE("initial_multiplier") {
  auto s = testutil::simplex_as_cqk({1, 2, 3}, 1);
  CHECK(initial_multiplier(s) == doctest::Approx(-5.0 / 3.0));

  Instance<double> sym{{1, 1, 1}, {0, 0, 0}, {1, 1, 1}, {0, 0, 0}, {5, 5, 5}, 3};
  CHECK(initial_multiplier(sym) == 1.0);

  auto in = testutil::two_var();
  std::vector<double> at_bounds{0.0, 1.0};
  CHECK(initial_multiplier(in, std::span<const double>(at_bounds)) == initial_multiplier(in));

  // Interior pattern {0}: lambda0 = (r - 0) / (1/1) = 1.
  std::vector<double> partial{0.5, 1.0};
  CHECK(initial_multiplier(in, std::span<const double>(partial)) == 1.0);

  std::vector<double> wrong(3, 0.5);
  CHECK_THROWS_AS(initial_multiplier(in, std::span<const double>(wrong)), DomainError);
}

TEST_CASE("breakpoints") {
  auto bp = breakpoints(testutil::two_var());
  REQUIRE(bp.lower.size() == 2);
  REQUIRE(bp.upper.size() == 2);
  CHECK(bp.lower[0].value == 0.0);
  CHECK(bp.lower[1].value == 0.0);
  CHECK(bp.upper[0].value == 1.0);
  CHECK(bp.upper[1].value == 2.0);

  auto s = breakpoints(testutil::simplex_as_cqk({1, 2, 3}, 1));
  CHECK(s.upper.empty());
  REQUIRE(s.lower.size() == 3);
  CHECK(s.lower[2].value == -3.0);
  CHECK(s.lower[2].index == 2);

  Instance<double> box{{1, 1}, {0, 0}, {1, 1}, {0, 0}, {0, 0}, 0};
  auto z = breakpoints(box);
  CHECK(z.lower[0].value == 0.0);
  CHECK(z.upper[1].value == 0.0);
}

TEST_CASE("default tolerance tracks the working precision") {
  CHECK(default_tolerance<double>() == doctest::Approx(1.8189894e-12).epsilon(1e-6));
  CHECK(default_tolerance<float>() == doctest::Approx(6.5e-6f).epsilon(0.05));
}

TEST_CASE("properties on random instances") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto in = testutil::random_mixed(seed, 12);
    REQUIRE_NOTHROW(validate(in));
    const auto bp = breakpoints(in);
    std::vector<double> pts;
    for (const auto& e : bp.lower) pts.push_back(e.value);
    for (const auto& e : bp.upper) pts.push_back(e.value);
    std::sort(pts.begin(), pts.end());

    for (const auto& lo : bp.lower)
      for (const auto& hi : bp.upper)
        if (lo.index == hi.index) CHECK(lo.value <= hi.value);

    double prev = -std::numeric_limits<double>::infinity();
    for (double lam = -12; lam <= 12; lam += 0.25) {
      const auto p = eval_phi(in, lam);
      CHECK(p.value >= prev);
      prev = p.value;
      CHECK(p.dminus >= 0);
      CHECK(p.dplus >= 0);

      const auto x = eval_x(in, lam);
      double btx = 0, scale = 0;
      for (std::size_t i = 0; i < in.size(); ++i) {
        CHECK(x[i] >= in.l[i]);
        CHECK(x[i] <= in.u[i]);
        btx += in.b[i] * x[i];
        scale += std::abs(in.b[i] * x[i]);
      }
      CHECK(std::abs(p.value - btx) <= 4 * in.size() * 2.2e-16 * scale);

      // Right derivative: step inside the next breakpoint gap.
      auto next = std::upper_bound(pts.begin(), pts.end(), lam);
      const double h = next == pts.end() ? 0.5 : (*next - lam) / 2;
      const auto q = eval_phi(in, lam + h);
      const double tol = in.size() * 4 * 2.2e-16 * std::max({1.0, std::abs(p.value), std::abs(q.value)});
      CHECK(std::abs((q.value - p.value) - h * p.dplus) <= tol + 1e-12);

      // Plateau: no interior variable strictly between breakpoints.
      const bool on_bp = std::binary_search(pts.begin(), pts.end(), lam);
      if (!on_bp && p.dplus == 0) CHECK(p.dminus == 0);
    }
  }
}

TEST_CASE("float precision") {
  Instance<float> in{{1, 2}, {0, 0}, {1, 1}, {0, 0}, {1, 1}, 1};
  auto p = eval_phi(in, 2.0f / 3.0f);
  CHECK(p.value == doctest::Approx(1.0f).epsilon(1e-6));
  auto conv = convert_precision<float>(testutil::two_var());
  CHECK(conv.d[1] == 2.0f);
}

}
