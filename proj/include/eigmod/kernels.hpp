#pragma once

#include "eigmod/types.hpp"

namespace eigmod::kernels {

/// Process-wide toggle for the OpenMP paths. Off by default; the CLI enables
/// it with --parallel. Not meant to be flipped concurrently with running work.
void set_parallel(bool on);
bool parallel();

/// Number of worker threads the parallel paths would use (1 when disabled).
int worker_count();

// Row-parallel kernels. Each output element is produced by exactly one
// thread with a fixed inner summation order, so results are identical with
// the toggle on or off.

Matrix gemm_nn(const Matrix& a, const Matrix& b);   // a * b
Matrix gemm_tn(const Matrix& a, const Matrix& b);   // a^T * b
Matrix gemm_nt(const Matrix& a, const Matrix& b);   // a * b^T

Vec gemv_t(const Matrix& a, const Vec& x);          // a^T * x

/// Q diag(lambda) Q^T, explicitly symmetrized.
Matrix reconstruct_symmetric(const Matrix& q, const Vec& lambda);

/// a += coeff * v v^T (in place), symmetric by construction.
void rank1_accumulate(Matrix& a, const Vec& v, double coeff);

void symmetrize(Matrix& a);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
/// max_ij |(a^T a - I)_ij|
double ortho_error(const Matrix& a);

namespace ref {

// Plain serial reference implementations (textbook i-j-k loops). Kept
// independent of the kernels above so tests and the kernel benchmark can
// compare the two.

Matrix gemm_nn(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
Matrix reconstruct_symmetric(const Matrix& q, const Vec& lambda);

}  // namespace ref

}  // namespace eigmod::kernels
