#include "eigmod/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eigmod/kernels.hpp"

namespace eigmod {

namespace {

double offdiag_mass(const Matrix& a) {
  double s = 0.0;
  const std::size_t n = a.rows();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
  return std::sqrt(2.0 * s);
}

}  // namespace

SpectralDecomposition jacobi_evd(const SymmetricDense& input, const JacobiConfig& cfg) {
  if (!(cfg.tol > 0.0) || cfg.max_sweeps < 1)
    throw std::invalid_argument("jacobi_evd: bad config");
  const std::size_t n = input.n;
  Matrix a = input.entries;
  // Accumulate V^T so the rotation touches contiguous rows.
  Matrix vt = Matrix::identity(n);

  const double anorm = kernels::frobenius_norm(a);
  const double target = cfg.tol * (anorm > 0.0 ? anorm : 1.0);

  int sweep = 0;
  double off = offdiag_mass(a);
  while (off > target) {
    if (++sweep > cfg.max_sweeps)
      throw NumericalError("jacobi",
                           "max sweeps exceeded, off-diagonal mass " + std::to_string(off));
    const double skip = off / (n > 1 ? static_cast<double>(n * n) : 1.0) * 1e-6;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= skip) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // A <- G^T A G on rows/cols p and q.
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        double* vp = vt.row(p);
        double* vq = vt.row(q);
        for (std::size_t j = 0; j < n; ++j) {
          const double xp = vp[j], xq = vq[j];
          vp[j] = c * xp - s * xq;
          vq[j] = s * xp + c * xq;
        }
      }
    }
    off = offdiag_mass(a);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SpectralDecomposition d;
  d.lambda.resize(n);
  d.q = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    d.lambda[j] = a(order[j], order[j]);
    const double* col = vt.row(order[j]);
    for (std::size_t i = 0; i < n; ++i) d.q(i, j) = col[i];
  }
  return d;
}

SpectralDecomposition perturbation_update(const SpectralDecomposition& d, const LowRankUpdate& u) {
  validate_update(d, u);
  const std::size_t n = d.size(), k = u.rank();

  double scale = 1.0;
  for (double l : d.lambda) scale = std::max(scale, std::fabs(l));
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (d.lambda[i + 1] - d.lambda[i] < 1e-12 * scale)
      throw NumericalError("perturbation", "eigenvalue gap below 1e-12*scale at index " +
                                               std::to_string(i));

  const Matrix w = kernels::gemm_tn(d.q, u.kmat);  // n x k, rows are K^T v_j
  // e(i,j) = (K^T v_i)^T J (K^T v_j)
  Matrix e(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < k; ++r) s += u.signs[r] * w(i, r) * w(j, r);
      e(i, j) = s;
    }

  SpectralDecomposition out;
  out.lambda.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.lambda[j] = d.lambda[j] + e(j, j);

  // Mixing coefficients c(i,j) = e(i,j) / (lambda_j - lambda_i), zero diagonal.
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c(i, j) = i == j ? 0.0 : e(i, j) / (d.lambda[j] - d.lambda[i]);
  for (std::size_t i = 0; i < n; ++i) c(i, i) += 1.0;
  out.q = kernels::gemm_nn(d.q, c);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += out.q(i, j) * out.q(i, j);
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t i = 0; i < n; ++i) out.q(i, j) *= inv;
  }

  // The estimate can (at larger norms) reorder eigenvalues; keep ascending.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return out.lambda[i] < out.lambda[j]; });
  SpectralDecomposition sorted;
  sorted.lambda.resize(n);
  sorted.q = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    sorted.lambda[j] = out.lambda[order[j]];
    for (std::size_t i = 0; i < n; ++i) sorted.q(i, j) = out.q(i, order[j]);
  }
  return sorted;
}

}  // namespace eigmod
