#include <doctest.h>

#include <cmath>
#include <random>

#include "eigmod/core.hpp"
#include "eigmod/kernels.hpp"
#include "eigmod/secular.hpp"

using namespace eigmod;

namespace {

// Independent k x k determinant by plain Gaussian elimination, used as the
// oracle for the bordered-determinant weight formula.
double det_gauss(Matrix m) {
  const std::size_t k = m.rows();
  double det = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t best = col;
    for (std::size_t i = col + 1; i < k; ++i)
      if (std::fabs(m(i, col)) > std::fabs(m(best, col))) best = i;
    if (best != col) {
      for (std::size_t j = 0; j < k; ++j) std::swap(m(col, j), m(best, j));
      det = -det;
    }
    if (m(col, col) == 0.0) return 0.0;
    det *= m(col, col);
    for (std::size_t i = col + 1; i < k; ++i) {
      const double f = m(i, col) / m(col, col);
      for (std::size_t j = col; j < k; ++j) m(i, j) -= f * m(col, j);
    }
  }
  return det;
}

// det[I_k - J U^T (xI - Lambda)^{-1} U], evaluated directly.
double det_identity(const Vec& lambda, const TransformedUpdate& tu, double x) {
  const std::size_t k = tu.rank(), n = lambda.size();
  Matrix m = Matrix::identity(k);
  for (std::size_t s = 0; s < n; ++s) {
    const double inv = 1.0 / (x - lambda[s]);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c)
        m(r, c) -= tu.signs[r] * tu.u(s, r) * tu.u(s, c) * inv;
  }
  return det_gauss(m);
}

TransformedUpdate make_tu(Matrix u, std::vector<int> signs) {
  TransformedUpdate tu;
  tu.u = std::move(u);
  tu.signs = std::move(signs);
  return tu;
}

}  // namespace

TEST_SUITE("secular") {

TEST_CASE("transform_update: identity basis passes K through") {
  SpectralDecomposition d;
  d.q = Matrix::identity(3);
  d.lambda = {0.0, 1.0, 2.0};
  Matrix k(3, 2);
  k(0, 0) = 1.0;
  k(2, 1) = -2.0;
  const TransformedUpdate tu = transform_update(d, {k, {1, -1}});
  CHECK(tu.u == k);
  CHECK(tu.signs[1] == -1);
}

TEST_CASE("transform_update: 2x2 rotation") {
  const double inv = 1.0 / std::sqrt(2.0);
  SpectralDecomposition d;
  d.q = Matrix(2, 2);
  d.q(0, 0) = inv;
  d.q(0, 1) = inv;
  d.q(1, 0) = inv;
  d.q(1, 1) = -inv;
  d.lambda = {0.0, 1.0};
  Matrix k(2, 1);
  k(0, 0) = 1.0;  // e1
  const TransformedUpdate tu = transform_update(d, {k, {1}});
  CHECK(tu.u(0, 0) == doctest::Approx(inv));
  CHECK(tu.u(1, 0) == doctest::Approx(inv));
}

TEST_CASE("transform_update preserves the Frobenius norm") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto [d, u] = random_instance(25, 3, 0.7, seed);
    const TransformedUpdate tu = transform_update(d, u);
    CHECK(std::fabs(kernels::frobenius_norm(tu.u) - kernels::frobenius_norm(u.kmat)) < 1e-12);
  }
}

TEST_CASE("secular_weights: rank-1 reduction alpha_i = sigma zeta_i^2") {
  const double inv = 1.0 / std::sqrt(2.0);
  Matrix u(2, 1);
  u(0, 0) = inv;
  u(1, 0) = inv;
  const Vec alpha = secular_weights({1.0, 2.0}, make_tu(u, {1}));
  CHECK(alpha[0] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(alpha[1] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("secular_weights: worked identity-update case gives (2, 0)") {
  const Vec alpha = secular_weights({0.0, 1.0}, make_tu(Matrix::identity(2), {1, 1}));
  CHECK(alpha[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(alpha[1] == doctest::Approx(0.0));
}

TEST_CASE("secular_weights: worked golden case gives (2, 1)") {
  Matrix u(2, 2);
  u(0, 0) = 1.0;
  u(1, 0) = 1.0;
  u(1, 1) = 1.0;
  const Vec alpha = secular_weights({0.0, 1.0}, make_tu(u, {1, 1}));
  CHECK(alpha[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(alpha[1] == doctest::Approx(1.0).epsilon(1e-13));
  // The resulting secular function vanishes at the eigenvalues of
  // [[1,1],[1,3]], i.e. 2 +/- sqrt(2).
  const SecularCoefficients c = secular_coefficients({0.0, 1.0}, make_tu(u, {1, 1}));
  CHECK(eval_secular(c, 2.0 + std::sqrt(2.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval_secular(c, 2.0 - std::sqrt(2.0)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rank-1 with sigma > 0 keeps all weights nonnegative") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 9);
    Vec lambda(n);
    for (double& l : lambda) l = g(rng);
    std::sort(lambda.begin(), lambda.end());
    for (std::size_t i = 1; i < n; ++i) lambda[i] = std::max(lambda[i], lambda[i - 1] + 1e-4);
    Matrix u(n, 1);
    for (std::size_t i = 0; i < n; ++i) u(i, 0) = g(rng);
    const Vec alpha = secular_weights(lambda, make_tu(u, {1}));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(alpha[i] >= 0.0);
      CHECK(alpha[i] == doctest::Approx(u(i, 0) * u(i, 0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("residue oracle: alpha_i equals the limit of (lambda_i - x) det[...]") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng() % 10);  // <= 12
    const std::size_t k = 1 + static_cast<std::size_t>(rng() % 3);
    Vec lambda(n);
    for (double& l : lambda) l = g(rng);
    std::sort(lambda.begin(), lambda.end());
    for (std::size_t i = 1; i < n; ++i) lambda[i] = std::max(lambda[i], lambda[i - 1] + 5e-2);
    Matrix u(n, k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) u(i, j) = g(rng);
    std::vector<int> signs(k);
    for (std::size_t j = 0; j < k; ++j) signs[j] = (rng() % 2) ? 1 : -1;
    const TransformedUpdate tu = make_tu(u, signs);

    const Vec alpha = secular_weights(lambda, tu);
    for (std::size_t i = 0; i < n; ++i) {
      double gap = 1e300;
      for (std::size_t s = 0; s < n; ++s)
        if (s != i) gap = std::min(gap, std::fabs(lambda[s] - lambda[i]));
      const double h = 1e-6 * gap;
      const double lo = (lambda[i] - (lambda[i] - h)) * det_identity(lambda, tu, lambda[i] - h);
      const double hi = (lambda[i] - (lambda[i] + h)) * det_identity(lambda, tu, lambda[i] + h);
      const double est = 0.5 * (lo + hi);
      CHECK(est == doctest::Approx(alpha[i]).epsilon(1e-4).scale(1e-8));
    }
  }
}

TEST_CASE("determinant identity: eval_secular matches det[I - J U^T (xI - L)^{-1} U]") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 4 + static_cast<std::size_t>(rng() % 6);
    const std::size_t k = 1 + static_cast<std::size_t>(rng() % 3);
    Vec lambda(n);
    for (double& l : lambda) l = g(rng);
    std::sort(lambda.begin(), lambda.end());
    for (std::size_t i = 1; i < n; ++i) lambda[i] = std::max(lambda[i], lambda[i - 1] + 5e-2);
    Matrix u(n, k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) u(i, j) = g(rng);
    std::vector<int> signs(k);
    for (std::size_t j = 0; j < k; ++j) signs[j] = (rng() % 2) ? 1 : -1;
    const TransformedUpdate tu = make_tu(u, signs);
    const SecularCoefficients c = secular_coefficients(lambda, tu);

    int used = 0;
    while (used < 100) {
      const double x = ux(rng);
      bool near_pole = false;
      for (double p : lambda)
        if (std::fabs(x - p) < 1e-3) near_pole = true;
      if (near_pole) continue;
      ++used;
      const double lhs = eval_secular(c, x);
      const double rhs = det_identity(lambda, tu, x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("eval_secular examples") {
  const SecularCoefficients c = make_secular({0.0, 1.0}, {2.0, 1.0});
  CHECK(eval_secular(c, 2.0) == doctest::Approx(-1.0));
  CHECK(eval_secular(c, 1e12) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(eval_secular(c, 2.0 + std::sqrt(2.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)eval_secular(c, 1.0), std::invalid_argument);
}

TEST_CASE("make_secular: construction rules") {
  CHECK_THROWS_AS((void)make_secular({1.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  const SecularCoefficients c = make_secular({0.0, 1.0, 2.0}, {1.0, 0.0, 3.0});
  CHECK(c.size() == 2);  // exact-zero weight dropped
  CHECK(c.poles[1] == 2.0);
}

TEST_CASE("secular_weights rejects k = 0 and non-distinct poles") {
  Matrix u0(2, 0);
  CHECK_THROWS_AS((void)secular_weights({0.0, 1.0}, make_tu(u0, {})), std::invalid_argument);
  Matrix u(2, 1);
  u(0, 0) = 1.0;
  CHECK_THROWS_AS((void)secular_weights({1.0, 1.0}, make_tu(u, {1})), std::invalid_argument);
}

TEST_CASE("rank2_split examples") {
  SUBCASE("unit vectors give the symmetric pair") {
    const auto [u1, u2] = rank2_split({1.0, 0.0}, {0.0, 1.0});
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(u1[0] == doctest::Approx(inv));
    CHECK(u1[1] == doctest::Approx(inv));
    CHECK(u2[0] == doctest::Approx(inv));
    CHECK(u2[1] == doctest::Approx(-inv));
    // u1 u1^T - u2 u2^T == [[0,1],[1,0]]
    CHECK(u1[0] * u1[0] - u2[0] * u2[0] == doctest::Approx(0.0));
    CHECK(u1[0] * u1[1] - u2[0] * u2[1] == doctest::Approx(1.0));
  }
  SUBCASE("a == b collapses the downdate") {
    const Vec a = {1.0, 2.0, 3.0};
    const auto [u1, u2] = rank2_split(a, a);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(u1[i] == doctest::Approx(std::sqrt(2.0) * a[i]));
      CHECK(u2[i] == doctest::Approx(0.0));
    }
  }
  SUBCASE("random reconstruction property") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec a(5), b(5);
    for (double& x : a) x = g(rng);
    for (double& x : b) x = g(rng);
    const auto [u1, u2] = rank2_split(a, b);
    double err = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        const double want = a[i] * b[j] + b[i] * a[j];
        const double got = u1[i] * u1[j] - u2[i] * u2[j];
        err = std::max(err, std::fabs(want - got));
      }
    CHECK(err <= 1e-12);
  }
}

TEST_CASE("deflate_problem: zero rows pass through unchanged") {
  Vec lambda = {0.0, 1.0, 2.0};
  Matrix u(3, 1);
  u(1, 0) = 0.5;  // only the middle row couples
  const DeflatedProblem dp = deflate_problem(lambda, make_tu(u, {1}));
  REQUIRE(dp.coeffs.size() == 1);
  CHECK(dp.coeffs.poles[0] == doctest::Approx(1.0));
  CHECK(dp.coeffs.weights[0] == doctest::Approx(0.25));
  REQUIRE(dp.unchanged.size() == 2);
  CHECK(dp.unchanged[0] == 0);
  CHECK(dp.unchanged[1] == 2);
  CHECK(dp.pole_origin[0] == 1);
}

TEST_CASE("deflate_problem: near-equal poles merge additively") {
  Vec lambda = {1.0, 1.0 + 1e-15, 2.0};
  Matrix u(3, 1);
  u(0, 0) = 1.0;
  u(1, 0) = 2.0;
  u(2, 0) = 1.0;
  const DeflatedProblem dp = deflate_problem(lambda, make_tu(u, {1}));
  REQUIRE(dp.coeffs.size() == 2);
  // Combined weight 1^2 + 2^2 at the merged pole.
  CHECK(dp.coeffs.weights[0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(dp.unchanged.size() == 1);
}

}  // TEST_SUITE
