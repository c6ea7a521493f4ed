#include "eigmod/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eigmod/kernels.hpp"

namespace eigmod {

namespace {

bool all_finite(const Matrix& m) {
  const double* p = m.data();
  for (std::size_t i = 0; i < m.rows() * m.cols(); ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

/// Explicit-Q Householder QR of a square matrix; flips columns so that the
/// implied R has a positive diagonal (makes the factor unique, hence the
/// instance deterministic).
Matrix orthogonal_factor(Matrix g) {
  const std::size_t n = g.rows();
  Matrix q = Matrix::identity(n);
  Vec v(n);
  for (std::size_t col = 0; col < n; ++col) {
    double norm = 0.0;
    for (std::size_t i = col; i < n; ++i) norm += g(i, col) * g(i, col);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = g(col, col) >= 0.0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (std::size_t i = col; i < n; ++i) {
      v[i] = g(i, col) - (i == col ? alpha : 0.0);
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    // g <- H g, q <- H q  with H = I - beta v v^T acting on rows col..n-1
    for (std::size_t j = col; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = col; i < n; ++i) s += v[i] * g(i, j);
      s *= beta;
      for (std::size_t i = col; i < n; ++i) g(i, j) -= s * v[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = col; i < n; ++i) s += v[i] * q(i, j);
      s *= beta;
      for (std::size_t i = col; i < n; ++i) q(i, j) -= s * v[i];
    }
  }
  // q currently holds the product of reflectors applied to I, i.e. Q^T.
  Matrix qt(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) qt(i, j) = q(j, i);
  for (std::size_t j = 0; j < n; ++j)
    if (g(j, j) < 0.0)
      for (std::size_t i = 0; i < n; ++i) qt(i, j) = -qt(i, j);
  return qt;
}

}  // namespace

SymmetricDense SymmetricDense::from(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymmetricDense: matrix not square");
  if (!all_finite(m)) throw std::invalid_argument("SymmetricDense: non-finite entries");
  SymmetricDense s;
  s.n = m.rows();
  s.entries = m;
  kernels::symmetrize(s.entries);
  return s;
}

void validate_decomposition(const SpectralDecomposition& d, double max_ortho_err) {
  if (d.q.rows() != d.q.cols() || d.q.rows() != d.lambda.size())
    throw std::invalid_argument("SpectralDecomposition: inconsistent dimensions");
  if (!all_finite(d.q)) throw std::invalid_argument("SpectralDecomposition: non-finite Q");
  for (std::size_t i = 0; i + 1 < d.lambda.size(); ++i)
    if (!(d.lambda[i] <= d.lambda[i + 1]))
      throw std::invalid_argument("SpectralDecomposition: eigenvalues not ascending");
  const double err = kernels::ortho_error(d.q);
  if (err > max_ortho_err)
    throw std::invalid_argument("SpectralDecomposition: orthonormality error " +
                                std::to_string(err));
}

void validate_update(const SpectralDecomposition& d, const LowRankUpdate& u) {
  if (u.dim() != d.size()) throw std::invalid_argument("LowRankUpdate: dimension mismatch");
  if (u.rank() < 1 || u.rank() > u.dim())
    throw std::invalid_argument("LowRankUpdate: rank out of range");
  if (u.signs.size() != u.rank()) throw std::invalid_argument("LowRankUpdate: signs size");
  for (int s : u.signs)
    if (s != 1 && s != -1) throw std::invalid_argument("LowRankUpdate: signs must be +1/-1");
  if (!all_finite(u.kmat)) throw std::invalid_argument("LowRankUpdate: non-finite K");
}

SymmetricDense reconstruct(const SpectralDecomposition& d) {
  if (d.q.cols() != d.lambda.size())
    throw std::invalid_argument("reconstruct: dimension mismatch");
  return SymmetricDense::from(kernels::reconstruct_symmetric(d.q, d.lambda));
}

SymmetricDense apply_update(const SymmetricDense& a, const LowRankUpdate& u) {
  if (u.dim() != a.n) throw std::invalid_argument("apply_update: dimension mismatch");
  if (u.signs.size() != u.rank()) throw std::invalid_argument("apply_update: signs size");
  Matrix out = a.entries;
  Vec col(a.n);
  for (std::size_t r = 0; r < u.rank(); ++r) {
    for (std::size_t i = 0; i < a.n; ++i) col[i] = u.kmat(i, r);
    kernels::rank1_accumulate(out, col, static_cast<double>(u.signs[r]));
  }
  return SymmetricDense::from(out);
}

std::pair<SpectralDecomposition, LowRankUpdate> random_instance(std::size_t n, std::size_t k,
                                                                double target_norm,
                                                                std::uint64_t seed) {
  if (k < 1 || k > n) throw std::invalid_argument("random_instance: need 1 <= k <= n");
  if (!(target_norm > 0.0)) throw std::invalid_argument("random_instance: target_norm <= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = gauss(rng);

  SpectralDecomposition d;
  d.q = orthogonal_factor(g);
  d.lambda.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.lambda[i] = unif(rng);
  std::sort(d.lambda.begin(), d.lambda.end());
  for (std::size_t i = 1; i < n; ++i)
    d.lambda[i] = std::max(d.lambda[i], d.lambda[i - 1] + kMinEigenGap);

  LowRankUpdate u;
  u.kmat = Matrix(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) u.kmat(i, j) = gauss(rng);
  const double fn = kernels::frobenius_norm(u.kmat);
  const double scale = target_norm / fn;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) u.kmat(i, j) *= scale;
  u.signs.assign(k, 1);

  return {std::move(d), std::move(u)};
}

}  // namespace eigmod
