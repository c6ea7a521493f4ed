#include <doctest.h>

#include <cmath>

#include "eigmod/locate.hpp"
#include "eigmod/rootfind.hpp"
#include "eigmod/secular.hpp"
#include "helpers.hpp"

using namespace eigmod;
using testutil::oracle_eigenvalues;

namespace {

const double kRoot2 = std::sqrt(2.0);

SpectralDecomposition golden_base() {
  SpectralDecomposition d;
  d.q = Matrix::identity(2);
  d.lambda = {0.0, 1.0};
  return d;
}

LowRankUpdate golden_update() {
  Matrix k(2, 2);
  k(0, 0) = 1.0;
  k(1, 0) = 1.0;
  k(1, 1) = 1.0;
  return {k, {1, 1}};
}

double eig_err(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("rootfind") {

TEST_CASE("dnc_solve: golden brackets") {
  const SecularCoefficients c = make_secular({0.0, 1.0}, {2.0, 1.0});
  SUBCASE("interior root") {
    const Vec roots = dnc_solve(c, {1e-9, 1.0 - 1e-9, 1}, 1e-12);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == doctest::Approx(2.0 - kRoot2).epsilon(1e-12));
  }
  SUBCASE("outer root") {
    const Vec roots = dnc_solve(c, {1.0 + 1e-9, 10.0, 1}, 1e-12);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == doctest::Approx(2.0 + kRoot2).epsilon(1e-12));
  }
}

TEST_CASE("dnc_solve: near-linear bracket converges within the contraction budget") {
  // A single far pole makes f almost linear on the bracket; the subdivision
  // depth must stay within ceil(log_{m+1}(width/tol)) + 1 rounds.
  const SecularCoefficients c = make_secular({-1000.0}, {1000.5});
  DncStats stats;
  const Vec roots = dnc_solve(c, {0.0, 1.0, 1}, 1e-12, &stats);
  REQUIRE(roots.size() == 1);
  CHECK(std::fabs(eval_secular(c, roots[0])) < 1e-12);
  const double bound = std::ceil(std::log(1.0 / 1e-12) / std::log(kDncPoints + 1.0)) + 1.0;
  CHECK(static_cast<double>(stats.rounds) <= bound);
}

TEST_CASE("dnc_solve: expected pair with no endpoint sign change (tangency handling)") {
  // f = 1 - 4/x + 1/(x-1) has the double root 2.
  const SecularCoefficients c = make_secular({0.0, 1.0}, {4.0, -1.0});
  const Vec roots = dnc_solve(c, {1.0 + 1e-9, 6.0, 2}, 1e-12);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(roots[1] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("dnc_solve: separated pair in one bracket") {
  // diag(0,1) -> {0.4, 0.6}: weights (0.24, -0.24), both roots in (0, 1).
  const SecularCoefficients c = make_secular({0.0, 1.0}, {0.24, -0.24});
  const Vec roots = dnc_solve(c, {1e-9, 1.0 - 1e-9, 2}, 1e-13);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0] == doctest::Approx(0.4).epsilon(1e-11));
  CHECK(roots[1] == doctest::Approx(0.6).epsilon(1e-11));
}

TEST_CASE("dnc_solve argument validation") {
  const SecularCoefficients c = make_secular({0.0}, {1.0});
  CHECK_THROWS_AS((void)dnc_solve(c, {1.0, 0.5, 1}, 1e-12), std::invalid_argument);
  CHECK_THROWS_AS((void)dnc_solve(c, {0.5, 1.5, 0}, 1e-12), std::invalid_argument);
  CHECK_THROWS_AS((void)dnc_solve(c, {0.5, 1.5, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("solve_rank1: worked 2x2") {
  const double inv = 1.0 / kRoot2;
  const Vec roots = solve_rank1({1.0, 2.0}, {inv, inv}, 1.0, 1e-14);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0] == doctest::Approx(2.0 - 0.5 * kRoot2).epsilon(1e-12));
  CHECK(roots[1] == doctest::Approx(2.0 + 0.5 * kRoot2).epsilon(1e-12));
}

TEST_CASE("solve_rank1: sigma = 0 returns the poles") {
  const Vec roots = solve_rank1({1.0, 2.0}, {0.5, 0.5}, 0.0, 1e-12);
  CHECK(roots == Vec{1.0, 2.0});
}

TEST_CASE("solve_rank1: negative shift mirrors the window") {
  const double inv = 1.0 / kRoot2;
  const Vec roots = solve_rank1({1.0, 2.0}, {inv, inv}, -1.0, 1e-14);
  REQUIRE(roots.size() == 2);
  // A - vv^T has eigenvalues 1 -/+ sqrt(2)/2.
  CHECK(roots[0] == doctest::Approx(1.0 - 0.5 * kRoot2).epsilon(1e-10));
  CHECK(roots[0] < 1.0);
  CHECK(roots[1] > 1.0);
  CHECK(roots[1] < 2.0);
  for (double r : roots) {
    const SecularCoefficients c = make_secular({1.0, 2.0}, {-0.5, -0.5});
    CHECK(std::fabs(eval_secular(c, r)) < 1e-10);
  }
}

TEST_CASE("solve_rank1: refinement sharpens with tolerance") {
  const double inv = 1.0 / kRoot2;
  const double coarse = solve_rank1({1.0, 2.0}, {inv, inv}, 1.0, 1e-4)[0];
  const double fine = solve_rank1({1.0, 2.0}, {inv, inv}, 1.0, 1e-14)[0];
  const double exact = 2.0 - 0.5 * kRoot2;
  CHECK(std::fabs(fine - exact) <= std::fabs(coarse - exact) + 1e-15);
  CHECK(std::fabs(fine - exact) < 1e-12);
}

TEST_CASE("solve_rank1 rejects zero zetas") {
  CHECK_THROWS_AS((void)solve_rank1({1.0, 2.0}, {0.0, 1.0}, 1.0, 1e-12),
                  std::invalid_argument);
}

TEST_CASE("update_eigenvalues: golden 2x2 instance") {
  const Vec values = update_eigenvalues(golden_base(), golden_update(), 1e-14);
  REQUIRE(values.size() == 2);
  CHECK(values[0] == doctest::Approx(2.0 - kRoot2).epsilon(1e-12));
  CHECK(values[1] == doctest::Approx(2.0 + kRoot2).epsilon(1e-12));
}

TEST_CASE("update_eigenvalues: K = 0 leaves the spectrum unchanged") {
  const auto [d, u0] = random_instance(9, 2, 1.0, 3);
  LowRankUpdate u = u0;
  u.kmat = Matrix(9, 2);
  const Vec values = update_eigenvalues(d, u, 1e-12);
  CHECK(values == d.lambda);
}

TEST_CASE("update_eigenvalues: rank-1 collision deflates to the repeated value") {
  // A = diag(1,2), v = e1: A + vv^T = diag(2,2).
  SpectralDecomposition d;
  d.q = Matrix::identity(2);
  d.lambda = {1.0, 2.0};
  Matrix k(2, 1);
  k(0, 0) = 1.0;
  const Vec values = update_eigenvalues(d, {k, {1}}, 1e-14);
  REQUIRE(values.size() == 2);
  CHECK(values[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(values[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("update_eigenvalues matches the Jacobi oracle on random instances") {
  int trial = 0;
  for (std::uint64_t seed = 0; trial < 100; ++seed, ++trial) {
    const std::size_t n = 50;
    const std::size_t k = 3;
    auto [d, u0] = random_instance(n, k, 0.4 + 0.2 * (seed % 4), seed + 2000);
    LowRankUpdate u = u0;
    u.signs = {1, seed % 2 ? -1 : 1, seed % 5 > 2 ? -1 : 1};
    const double tol = default_tolerance(d.lambda, u);
    const Vec values = update_eigenvalues(d, u, tol);
    const Vec oracle = oracle_eigenvalues(d, u);
    REQUIRE(values.size() == oracle.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      CHECK(values[i] == doctest::Approx(oracle[i]).epsilon(0.0).scale(1.0).epsilon(1e-9));
  }
}

TEST_CASE("roots satisfy the residual bound and respect the location vector") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [d, u0] = random_instance(16, 2, 1.1, seed + 5000);
    const LowRankUpdate u = testutil::with_signs(u0, {1, seed % 2 ? -1 : 1});
    const TransformedUpdate tu = transform_update(d, u);
    const DeflatedProblem dp = deflate_problem(d.lambda, tu);
    if (dp.coeffs.size() != 16) continue;
    const EigenvalueUpdate plan = update_eigenvalues_full(d, u, 1e-13);
    REQUIRE(plan.values.size() == 16);

    // residual bound per root
    for (double r : plan.roots) {
      double gap = 1e300, mass = 0.0;
      for (std::size_t j = 0; j < dp.coeffs.size(); ++j) {
        gap = std::min(gap, std::fabs(r - dp.coeffs.poles[j]));
        mass += std::fabs(dp.coeffs.weights[j]);
      }
      CHECK(std::fabs(eval_secular(dp.coeffs, r)) <= 1e-8 * (1.0 + mass / gap));
    }

    // the solved roots land in the located intervals
    const LocationVector loc = locate_rank2(dp.coeffs, classify_shift(u.signs));
    const std::vector<long> got = testutil::classify_intervals(dp.coeffs.poles, plan.roots);
    CHECK(got == loc.counts);
  }
}

TEST_CASE("update_eigenvalues: error reporting carries the stage") {
  SpectralDecomposition d;
  d.q = Matrix::identity(2);
  d.lambda = {0.0, 1.0};
  Matrix k(3, 1);
  CHECK_THROWS_AS((void)update_eigenvalues(d, {k, {1}}, 1e-12), std::invalid_argument);
}

}  // TEST_SUITE
