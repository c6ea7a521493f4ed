#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eigmod/baseline.hpp"
#include "eigmod/core.hpp"
#include "eigmod/kernels.hpp"

using namespace eigmod;

namespace {

SymmetricDense sym2(double a00, double a01, double a11) {
  Matrix m(2, 2);
  m(0, 0) = a00;
  m(0, 1) = a01;
  m(1, 0) = a01;
  m(1, 1) = a11;
  return SymmetricDense::from(m);
}

double eig_err(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("baseline") {

TEST_CASE("jacobi: already diagonal") {
  const SpectralDecomposition d = jacobi_evd(sym2(3.0, 0.0, 1.0));
  CHECK(d.lambda[0] == doctest::Approx(1.0));
  CHECK(d.lambda[1] == doctest::Approx(3.0));
  // Q must be a permutation up to sign.
  CHECK(std::fabs(d.q(0, 1)) == doctest::Approx(1.0));
  CHECK(std::fabs(d.q(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("jacobi: symmetric off-diagonal pair") {
  const SpectralDecomposition d = jacobi_evd(sym2(0.0, 1.0, 0.0));
  CHECK(d.lambda[0] == doctest::Approx(-1.0));
  CHECK(d.lambda[1] == doctest::Approx(1.0));
  const double inv = 1.0 / std::sqrt(2.0);
  CHECK(std::fabs(d.q(0, 0)) == doctest::Approx(inv));
  CHECK(std::fabs(d.q(0, 1)) == doctest::Approx(inv));
  CHECK(d.q(0, 0) * d.q(1, 0) < 0.0);  // (1,-1) direction
  CHECK(d.q(0, 1) * d.q(1, 1) > 0.0);  // (1,1) direction
}

TEST_CASE("jacobi: golden 2x2") {
  const SpectralDecomposition d = jacobi_evd(sym2(1.0, 1.0, 3.0));
  CHECK(d.lambda[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-13));
  CHECK(d.lambda[1] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("jacobi: reconstruction residual within 10*tol*normF") {
  const JacobiConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [d, u] = random_instance(40, 2, 1.0, seed);
    const SymmetricDense a = apply_update(reconstruct(d), u);
    const SpectralDecomposition e = jacobi_evd(a, cfg);
    const SymmetricDense back = reconstruct(e);
    double err = 0.0;
    for (std::size_t i = 0; i < a.n; ++i)
      for (std::size_t j = 0; j < a.n; ++j)
        err += (back.entries(i, j) - a.entries(i, j)) * (back.entries(i, j) - a.entries(i, j));
    err = std::sqrt(err);
    CHECK(err <= 10.0 * cfg.tol * kernels::frobenius_norm(a.entries));
    CHECK(kernels::ortho_error(e.q) < 1e-12);
    for (std::size_t i = 0; i + 1 < e.lambda.size(); ++i) CHECK(e.lambda[i] <= e.lambda[i + 1]);
  }
}

TEST_CASE("jacobi: sweep budget produces a diagnostic") {
  const auto [d, u] = random_instance(20, 1, 1.0, 3);
  const SymmetricDense a = reconstruct(d);
  JacobiConfig cfg;
  cfg.max_sweeps = 1;
  cfg.tol = 1e-15;
  try {
    (void)jacobi_evd(a, cfg);
    // A single sweep may legitimately converge on small instances.
  } catch (const NumericalError& e) {
    CHECK(e.stage() == "jacobi");
  }
}

TEST_CASE("perturbation: diagonal update is exact") {
  SpectralDecomposition d;
  d.q = Matrix::identity(2);
  d.lambda = {1.0, 2.0};
  Matrix k(2, 1);
  k(0, 0) = 0.01;
  const SpectralDecomposition out = perturbation_update(d, {k, {1}});
  CHECK(out.lambda[0] == doctest::Approx(1.0001).epsilon(1e-14));
  CHECK(out.lambda[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::fabs(out.q(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("perturbation: K = 0 is the identity map") {
  const auto [d, u0] = random_instance(12, 2, 1.0, 5);
  LowRankUpdate u = u0;
  u.kmat = Matrix(12, 2);
  const SpectralDecomposition out = perturbation_update(d, u);
  CHECK(eig_err(out.lambda, d.lambda) == doctest::Approx(0.0));
}

TEST_CASE("perturbation: first-order vectors keep near-orthonormality at small norms") {
  const auto [d, u] = random_instance(30, 2, 0.01, 9);
  const SpectralDecomposition out = perturbation_update(d, u);
  CHECK(kernels::ortho_error(out.q) < 1e-6);
}

TEST_CASE("perturbation: eigenvalue error scales like the fourth power of the norm") {
  // Halving ||K|| should cut the eigenvalue error by at least ~8x (median
  // over seeds).
  Vec ratios;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [d, u_big] = random_instance(20, 2, 0.2, seed);
    LowRankUpdate u_small = u_big;
    for (std::size_t i = 0; i < u_small.kmat.rows(); ++i)
      for (std::size_t j = 0; j < u_small.kmat.cols(); ++j) u_small.kmat(i, j) *= 0.5;

    auto err_for = [&](const LowRankUpdate& u) {
      const SymmetricDense target = apply_update(reconstruct(d), u);
      const SpectralDecomposition oracle = jacobi_evd(target);
      const SpectralDecomposition est = perturbation_update(d, u);
      return eig_err(est.lambda, oracle.lambda);
    };
    const double big = err_for(u_big);
    const double small = err_for(u_small);
    if (small > 0.0) ratios.push_back(big / small);
  }
  std::sort(ratios.begin(), ratios.end());
  CHECK(ratios[ratios.size() / 2] >= 8.0);
}

TEST_CASE("perturbation rejects clustered spectra") {
  SpectralDecomposition d;
  d.q = Matrix::identity(2);
  d.lambda = {1.0, 1.0 + 1e-15};
  Matrix k(2, 1);
  k(0, 0) = 0.1;
  CHECK_THROWS_AS((void)perturbation_update(d, {k, {1}}), NumericalError);
}

}  // TEST_SUITE
