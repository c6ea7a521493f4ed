#include "eigmod/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eigmod::kernels {

namespace {
std::atomic<bool> g_parallel{false};

void check_dims(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("dimension mismatch in ") + what);
}
}  // namespace

void set_parallel(bool on) { g_parallel.store(on); }
bool parallel() { return g_parallel.load(); }

int worker_count() {
#ifdef _OPENMP
  return parallel() ? omp_get_max_threads() : 1;
#else
  return 1;
#endif
}

Matrix gemm_nn(const Matrix& a, const Matrix& b) {
  check_dims(a.cols() == b.rows(), "gemm_nn");
  const std::ptrdiff_t m = a.rows(), n = b.cols(), inner = a.cols();
  Matrix c(m, n);
  const bool par = parallel();
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::ptrdiff_t l = 0; l < inner; ++l) {
      const double ail = ai[l];
      const double* bl = b.row(l);
      for (std::ptrdiff_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  check_dims(a.rows() == b.rows(), "gemm_tn");
  const std::ptrdiff_t m = a.cols(), n = b.cols(), inner = a.rows();
  Matrix c(m, n);
  const bool par = parallel();
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* ci = c.row(i);
    for (std::ptrdiff_t l = 0; l < inner; ++l) {
      const double ali = a(l, i);
      const double* bl = b.row(l);
      for (std::ptrdiff_t j = 0; j < n; ++j) ci[j] += ali * bl[j];
    }
  }
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  check_dims(a.cols() == b.cols(), "gemm_nt");
  const std::ptrdiff_t m = a.rows(), n = b.rows(), inner = a.cols();
  Matrix c(m, n);
  const bool par = parallel();
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (std::ptrdiff_t l = 0; l < inner; ++l) s += ai[l] * bj[l];
      ci[j] = s;
    }
  }
  return c;
}

Vec gemv_t(const Matrix& a, const Vec& x) {
  check_dims(a.rows() == x.size(), "gemv_t");
  const std::size_t m = a.cols(), inner = a.rows();
  Vec y(m, 0.0);
  for (std::size_t l = 0; l < inner; ++l) {
    const double xl = x[l];
    const double* al = a.row(l);
    for (std::size_t j = 0; j < m; ++j) y[j] += xl * al[j];
  }
  return y;
}

Matrix reconstruct_symmetric(const Matrix& q, const Vec& lambda) {
  check_dims(q.cols() == lambda.size(), "reconstruct_symmetric");
  const std::size_t n = q.rows(), k = q.cols();
  Matrix w(n, k);
  const bool par = parallel();
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    for (std::size_t j = 0; j < k; ++j) w(i, j) = q(i, j) * lambda[j];
  Matrix a = gemm_nt(w, q);
  symmetrize(a);
  return a;
}

void rank1_accumulate(Matrix& a, const Vec& v, double coeff) {
  check_dims(a.rows() == v.size() && a.cols() == v.size(), "rank1_accumulate");
  const std::ptrdiff_t n = a.rows();
  const bool par = parallel();
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double* ai = a.row(i);
    const double cvi = coeff * v[i];
    for (std::ptrdiff_t j = 0; j < n; ++j) ai[j] += cvi * v[j];
  }
}

void symmetrize(Matrix& a) {
  check_dims(a.rows() == a.cols(), "symmetrize");
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = s;
      a(j, i) = s;
    }
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  const double* p = a.data();
  const std::size_t sz = a.rows() * a.cols();
  for (std::size_t i = 0; i < sz; ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  const double* p = a.data();
  const std::size_t sz = a.rows() * a.cols();
  for (std::size_t i = 0; i < sz; ++i) m = std::max(m, std::fabs(p[i]));
  return m;
}

double ortho_error(const Matrix& a) {
  Matrix g = gemm_tn(a, a);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return max_abs(g);
}

namespace ref {

Matrix gemm_nn(const Matrix& a, const Matrix& b) {
  check_dims(a.cols() == b.rows(), "ref::gemm_nn");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < a.cols(); ++l) s += a(i, l) * b(l, j);
      c(i, j) = s;
    }
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  check_dims(a.rows() == b.rows(), "ref::gemm_tn");
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < a.rows(); ++l) s += a(l, i) * b(l, j);
      c(i, j) = s;
    }
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  check_dims(a.cols() == b.cols(), "ref::gemm_nt");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < a.cols(); ++l) s += a(i, l) * b(j, l);
      c(i, j) = s;
    }
  return c;
}

Matrix reconstruct_symmetric(const Matrix& q, const Vec& lambda) {
  check_dims(q.cols() == lambda.size(), "ref::reconstruct_symmetric");
  const std::size_t n = q.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < q.cols(); ++l) s += q(i, l) * lambda[l] * q(j, l);
      a(i, j) = s;
    }
  symmetrize(a);
  return a;
}

}  // namespace ref

}  // namespace eigmod::kernels
