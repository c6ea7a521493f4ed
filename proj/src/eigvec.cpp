#include "eigmod/eigvec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "eigmod/core.hpp"
#include "eigmod/kernels.hpp"

namespace eigmod {

namespace {

// Tiny cyclic Jacobi on a k x k symmetric matrix, private to this module so
// the eigenvector path stays independent of the baseline oracle.
void small_symmetric_evd(Matrix b, Vec& eigvals, Matrix& eigvecs) {
  const std::size_t k = b.rows();
  eigvecs = Matrix::identity(k);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = p + 1; q < k; ++q) off += b(p, q) * b(p, q);
    if (off < 1e-30 * (1.0 + kernels::max_abs(b))) break;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = p + 1; q < k; ++q) {
        if (b(p, q) == 0.0) continue;
        const double tau = (b(q, q) - b(p, p)) / (2.0 * b(p, q));
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t i = 0; i < k; ++i) {
          const double bip = b(i, p), biq = b(i, q);
          b(i, p) = c * bip - s * biq;
          b(i, q) = s * bip + c * biq;
        }
        for (std::size_t j = 0; j < k; ++j) {
          const double bpj = b(p, j), bqj = b(q, j);
          b(p, j) = c * bpj - s * bqj;
          b(q, j) = s * bpj + c * bqj;
        }
        b(p, q) = 0.0;
        b(q, p) = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          const double vip = eigvecs(i, p), viq = eigvecs(i, q);
          eigvecs(i, p) = c * vip - s * viq;
          eigvecs(i, q) = s * vip + c * viq;
        }
      }
  }
  eigvals.resize(k);
  for (std::size_t i = 0; i < k; ++i) eigvals[i] = b(i, i);
}

void sign_fix(Vec& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
  if (v[imax] < 0.0)
    for (double& x : v) x = -x;
}

double lambda_scale(const Vec& lambda) {
  double s = 1.0;
  for (double l : lambda) s = std::max(s, std::fabs(l));
  return s;
}

// In-basis eigenvector for an eigenvalue that collided with pole `idx`
// (vanishing weight, coupled row): the pair (beta, u_idx) spans the null
// space of the bordered system [[M_i, -J w_i], [w_i^T, 0]], and the other
// components follow from the usual resolvent formula. Returns false when the
// bordered system is not singular.
bool basis_vector_for_collision(const TransformedUpdate& tu, const Vec& lambda, std::size_t idx,
                                Vec& w_out) {
  const std::size_t n = lambda.size(), k = tu.rank();
  double scale = 1.0;
  for (double l : lambda) scale = std::max(scale, std::fabs(l));
  const double merge_gap = kPoleMergeRelGap * scale;
  const double pole = lambda[idx];

  Matrix bordered(k + 1, k + 1);
  for (std::size_t r = 0; r < k; ++r) bordered(r, r) = 1.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double gap = lambda[s] - pole;
    if (std::fabs(gap) < merge_gap) continue;
    const double* ws = tu.u.row(s);
    for (std::size_t r = 0; r < k; ++r) {
      const double f = tu.signs[r] * ws[r] / gap;
      for (std::size_t c = 0; c < k; ++c) bordered(r, c) += f * ws[c];
    }
  }
  const double* wi = tu.u.row(idx);
  for (std::size_t r = 0; r < k; ++r) {
    bordered(r, k) = -static_cast<double>(tu.signs[r]) * wi[r];
    bordered(k, r) = wi[r];
  }

  const NullDirection nd = null_direction(bordered);
  if (nd.residual > 1e-6 * std::max(1.0, kernels::frobenius_norm(bordered))) return false;

  w_out.assign(n, 0.0);
  double norm2 = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double gap = lambda[s] - pole;
    if (std::fabs(gap) < merge_gap) continue;
    double ub = 0.0;
    for (std::size_t r = 0; r < k; ++r) ub += tu.u(s, r) * nd.direction[r];
    w_out[s] = -ub / gap;
    norm2 += w_out[s] * w_out[s];
  }
  w_out[idx] = nd.direction[k];
  norm2 += w_out[idx] * w_out[idx];
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) return false;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : w_out) x *= inv;
  return true;
}

// Whether the U rows at `idx` carry no coupling (the eigenpair is exactly
// preserved under the update).
bool row_is_negligible(const TransformedUpdate& tu, std::size_t idx) {
  double row = 0.0;
  for (std::size_t r = 0; r < tu.rank(); ++r) row += tu.u(idx, r) * tu.u(idx, r);
  const double fn = kernels::frobenius_norm(tu.u);
  return row <= 1e-12 * (1.0 + fn * fn);
}

// In-basis eigenvector for a secular root: w_s = (U beta)_s / (lambda_s -
// root), unit normalized. Returns false when the null problem is not
// actually singular at `root`.
bool basis_vector_for_root(const TransformedUpdate& tu, const Vec& lambda, double root,
                           Vec& w_out) {
  const Matrix m = null_problem(tu, lambda, root);
  const NullDirection nd = null_direction(m);
  const double mnorm = kernels::frobenius_norm(m);
  if (nd.residual > 1e-6 * std::max(1.0, mnorm)) return false;
  const std::size_t n = lambda.size(), k = tu.rank();
  w_out.assign(n, 0.0);
  double norm2 = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double ub = 0.0;
    for (std::size_t r = 0; r < k; ++r) ub += tu.u(s, r) * nd.direction[r];
    const double ws = ub / (lambda[s] - root);
    w_out[s] = ws;
    norm2 += ws * ws;
  }
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) return false;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : w_out) x *= inv;
  return true;
}

}  // namespace

NullDirection null_direction(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("null_direction: square matrix required");
  const std::size_t k = m.rows();
  const Matrix b = kernels::ref::gemm_tn(m, m);
  Vec eigvals;
  Matrix eigvecs;
  small_symmetric_evd(b, eigvals, eigvecs);
  std::size_t imin = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (eigvals[i] < eigvals[imin]) imin = i;
  NullDirection nd;
  nd.direction.resize(k);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    nd.direction[i] = eigvecs(i, imin);
    norm2 += nd.direction[i] * nd.direction[i];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < k; ++i) nd.direction[i] *= inv;
  double res2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double mi = 0.0;
    for (std::size_t j = 0; j < k; ++j) mi += m(i, j) * nd.direction[j];
    res2 += mi * mi;
  }
  nd.residual = std::sqrt(res2);
  return nd;
}

Matrix null_problem(const TransformedUpdate& tu, const Vec& lambda, double lambda_new) {
  const std::size_t n = lambda.size(), k = tu.rank();
  if (tu.dim() != n) throw std::invalid_argument("null_problem: dimension mismatch");
  Matrix m = Matrix::identity(k);
  for (std::size_t s = 0; s < n; ++s) {
    const double gap = lambda[s] - lambda_new;
    if (std::fabs(gap) < 1e-300)
      throw std::invalid_argument("null_problem: lambda_new equals an old eigenvalue");
    const double* ws = tu.u.row(s);
    for (std::size_t r = 0; r < k; ++r) {
      const double f = tu.signs[r] * ws[r] / gap;
      for (std::size_t c = 0; c < k; ++c) m(r, c) += f * ws[c];
    }
  }
  return m;
}

Vec update_eigenvector(const SpectralDecomposition& d, const LowRankUpdate& u,
                       double lambda_new) {
  validate_update(d, u);
  const std::size_t n = d.size();
  const double scale = lambda_scale(d.lambda);

  std::size_t nearest = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = std::fabs(d.lambda[i] - lambda_new);
    if (g < gap) {
      gap = g;
      nearest = i;
    }
  }
  if (gap < 1e-12 * scale) {
    const TransformedUpdate tu = transform_update(d, u);
    if (!row_is_negligible(tu, nearest)) {
      // The new eigenvalue sits on an old one but the row still couples:
      // the old vector is not an eigenvector, solve the bordered system.
      Vec w;
      if (basis_vector_for_collision(tu, d.lambda, nearest, w)) {
        Matrix wcol(n, 1);
        for (std::size_t i = 0; i < n; ++i) wcol(i, 0) = w[i];
        const Matrix vcol = kernels::gemm_nn(d.q, wcol);
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = vcol(i, 0);
        sign_fix(v);
        return v;
      }
    }
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = d.q(i, nearest);
    return v;
  }

  const TransformedUpdate tu = transform_update(d, u);
  Vec w;
  if (!basis_vector_for_root(tu, d.lambda, lambda_new, w))
    throw NumericalError("eigvec", "null problem is full rank: " + std::to_string(lambda_new) +
                                       " is not an updated eigenvalue");
  Matrix wcol(n, 1);
  for (std::size_t i = 0; i < n; ++i) wcol(i, 0) = w[i];
  const Matrix vcol = kernels::gemm_nn(d.q, wcol);
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = vcol(i, 0);
  sign_fix(v);
  return v;
}

SpectralDecomposition assemble_eigenvectors(const SpectralDecomposition& d,
                                            const EigenvalueUpdate& plan,
                                            bool reorthogonalize) {
  const std::size_t n = d.size();
  const double scale = lambda_scale(d.lambda);

  // Final eigen order: roots, unchanged and collided values merged ascending.
  enum class Kind { root, unchanged, collided };
  struct Entry {
    double value;
    Kind kind;
    std::size_t payload;  // root index or original eigen index
  };
  std::vector<Entry> entries;
  entries.reserve(n);
  for (std::size_t r = 0; r < plan.roots.size(); ++r)
    entries.push_back({plan.roots[r], Kind::root, r});
  for (std::size_t idx : plan.problem.unchanged)
    entries.push_back({d.lambda[idx], Kind::unchanged, idx});
  for (std::size_t idx : plan.problem.collided)
    entries.push_back({d.lambda[idx], Kind::collided, idx});
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });
  if (entries.size() != n)
    throw NumericalError("assemble", "eigenpair count mismatch");

  Matrix basis(n, n);
  std::vector<unsigned char> computed(n, 0);
  std::vector<std::string> errors;
  const bool par = kernels::parallel();
  bool failed = false;
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::ptrdiff_t col = 0; col < static_cast<std::ptrdiff_t>(n); ++col) {
    const Entry& e = entries[col];
    if (e.kind == Kind::unchanged) {
      basis(e.payload, col) = 1.0;
      continue;
    }
    if (e.kind == Kind::collided) {
      Vec w;
      if (basis_vector_for_collision(plan.transformed, d.lambda, e.payload, w)) {
        for (std::size_t i = 0; i < n; ++i) basis(i, col) = w[i];
        computed[col] = 1;
      } else {
        basis(e.payload, col) = 1.0;
      }
      continue;
    }
    const double root = e.value;
    // A root that converged onto an old eigenvalue is a collision too.
    std::size_t nearest = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = std::fabs(d.lambda[i] - root);
      if (g < gap) {
        gap = g;
        nearest = i;
      }
    }
    if (gap < 1e-12 * scale) {
      Vec w;
      if (!row_is_negligible(plan.transformed, nearest) &&
          basis_vector_for_collision(plan.transformed, d.lambda, nearest, w)) {
        for (std::size_t i = 0; i < n; ++i) basis(i, col) = w[i];
        computed[col] = 1;
      } else {
        basis(nearest, col) = 1.0;
      }
      continue;
    }
    Vec w;
    if (!basis_vector_for_root(plan.transformed, d.lambda, root, w)) {
#pragma omp critical
      errors.push_back("root " + std::to_string(root) + " rejected by the null problem");
      failed = true;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) basis(i, col) = w[i];
    computed[col] = 1;
  }
  if (failed) throw NumericalError("assemble", errors.empty() ? "rejected root" : errors.front());

  SpectralDecomposition out;
  out.lambda.resize(n);
  for (std::size_t col = 0; col < n; ++col) out.lambda[col] = entries[col].value;
  out.q = kernels::gemm_nn(d.q, basis);
  for (std::size_t col = 0; col < n; ++col) {
    if (!computed[col]) continue;
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::fabs(out.q(i, col)) > std::fabs(out.q(imax, col))) imax = i;
    if (out.q(imax, col) < 0.0)
      for (std::size_t i = 0; i < n; ++i) out.q(i, col) = -out.q(i, col);
  }

  if (reorthogonalize) {
    // Modified Gram-Schmidt cleanup (opt-in).
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t prev = 0; prev < j; ++prev) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += out.q(i, prev) * out.q(i, j);
        for (std::size_t i = 0; i < n; ++i) out.q(i, j) -= dot * out.q(i, prev);
      }
      double norm2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) norm2 += out.q(i, j) * out.q(i, j);
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t i = 0; i < n; ++i) out.q(i, j) *= inv;
    }
  }
  return out;
}

UpdateResult update_decomposition(const SpectralDecomposition& d, const LowRankUpdate& u,
                                  double tol, bool reorthogonalize) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const EigenvalueUpdate plan = update_eigenvalues_full(d, u, tol);
  SpectralDecomposition updated;
  try {
    updated = assemble_eigenvectors(d, plan, reorthogonalize);
  } catch (const NumericalError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError("assemble", e.what());
  }
  const auto t1 = clock::now();

  UpdateResult res;
  res.decomposition = std::move(updated);
  res.wall_time = std::chrono::duration<double>(t1 - t0).count();
  const SymmetricDense target = apply_update(reconstruct(d), u);
  const SymmetricDense got = reconstruct(res.decomposition);
  double err2 = 0.0;
  for (std::size_t i = 0; i < target.n; ++i)
    for (std::size_t j = 0; j < target.n; ++j) {
      const double diff = got.entries(i, j) - target.entries(i, j);
      err2 += diff * diff;
    }
  res.residual_fro = std::sqrt(err2);
  res.ortho_err = kernels::ortho_error(res.decomposition.q);
  return res;
}

}  // namespace eigmod
