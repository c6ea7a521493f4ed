#include <doctest.h>

#include <cmath>
#include <random>

#include "eigmod/kernels.hpp"

using namespace eigmod;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

double max_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::fabs(a(i, j) - b(i, j)));
  return m;
}

struct ParallelGuard {
  ~ParallelGuard() { kernels::set_parallel(false); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("gemm variants match the serial references") {
  const Matrix a = random_matrix(37, 23, 1);
  const Matrix b = random_matrix(23, 31, 2);
  const Matrix bt = random_matrix(31, 23, 3);
  const Matrix asq = random_matrix(37, 23, 4);

  CHECK(max_diff(kernels::gemm_nn(a, b), kernels::ref::gemm_nn(a, b)) < 1e-12);
  CHECK(max_diff(kernels::gemm_tn(a, asq), kernels::ref::gemm_tn(a, asq)) < 1e-12);
  CHECK(max_diff(kernels::gemm_nt(a, bt), kernels::ref::gemm_nt(a, bt)) < 1e-12);
}

TEST_CASE("parallel toggle does not change results") {
  ParallelGuard guard;
  const Matrix a = random_matrix(40, 40, 5);
  const Matrix b = random_matrix(40, 40, 6);
  Vec lambda(40);
  for (std::size_t i = 0; i < 40; ++i) lambda[i] = std::sin(static_cast<double>(i));

  kernels::set_parallel(false);
  const Matrix c_serial = kernels::gemm_nn(a, b);
  const Matrix r_serial = kernels::reconstruct_symmetric(a, lambda);
  kernels::set_parallel(true);
  const Matrix c_par = kernels::gemm_nn(a, b);
  const Matrix r_par = kernels::reconstruct_symmetric(a, lambda);

  // Row partitioning keeps per-element summation order fixed.
  CHECK(c_serial == c_par);
  CHECK(r_serial == r_par);
}

TEST_CASE("reconstruct_symmetric agrees with the reference and is symmetric") {
  const Matrix q = random_matrix(19, 19, 7);
  Vec lambda(19);
  for (std::size_t i = 0; i < 19; ++i) lambda[i] = -1.0 + 0.1 * static_cast<double>(i);
  const Matrix r = kernels::reconstruct_symmetric(q, lambda);
  CHECK(max_diff(r, kernels::ref::reconstruct_symmetric(q, lambda)) < 1e-11);
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = 0; j < r.cols(); ++j) CHECK(r(i, j) == r(j, i));
}

TEST_CASE("rank1_accumulate adds sigma v v^T") {
  Matrix a(3, 3);
  Vec v = {1.0, 2.0, -1.0};
  kernels::rank1_accumulate(a, v, -2.0);
  CHECK(a(0, 0) == doctest::Approx(-2.0));
  CHECK(a(0, 1) == doctest::Approx(-4.0));
  CHECK(a(2, 1) == doctest::Approx(4.0));
}

TEST_CASE("ortho_error flags non-orthonormal columns") {
  Matrix id = Matrix::identity(8);
  CHECK(kernels::ortho_error(id) == 0.0);
  id(0, 0) = 1.5;
  CHECK(kernels::ortho_error(id) > 1.0);
}

TEST_CASE("norms") {
  Matrix a(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 4.0;
  CHECK(kernels::frobenius_norm(a) == doctest::Approx(5.0));
  CHECK(kernels::max_abs(a) == doctest::Approx(4.0));
}

TEST_CASE("dimension mismatches are rejected") {
  const Matrix a = random_matrix(3, 4, 8);
  const Matrix b = random_matrix(3, 4, 9);
  CHECK_THROWS_AS((void)kernels::gemm_nn(a, b), std::invalid_argument);
}

}  // TEST_SUITE
