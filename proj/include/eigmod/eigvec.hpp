#pragma once

#include "eigmod/rootfind.hpp"
#include "eigmod/secular.hpp"
#include "eigmod/types.hpp"

namespace eigmod {

struct NullDirection {
  Vec direction;    // unit k-vector minimizing ||m x||
  double residual;  // ||m direction||_2, reported for caller validation
};

/// Smallest singular direction of a small k x k matrix.
NullDirection null_direction(const Matrix& m);

/// I_k + J L^T (Lambda - lambda' I)^{-1} L for a candidate new eigenvalue;
/// singular exactly when lambda' solves the secular equation.
Matrix null_problem(const TransformedUpdate& tu, const Vec& lambda, double lambda_new);

/// Reconstructs one updated eigenvector: v = Q (Lambda - lambda' I)^{-1} L a0
/// normalized, sign fixed so the largest-magnitude entry is positive. A
/// lambda_new within 1e-12*scale of an old eigenvalue returns that old
/// eigenvector (deflation record path).
Vec update_eigenvector(const SpectralDecomposition& d, const LowRankUpdate& u, double lambda_new);

/// Batched eigenvector reconstruction for a finished eigenvalue update;
/// unchanged pairs are copied through exactly.
SpectralDecomposition assemble_eigenvectors(const SpectralDecomposition& d,
                                            const EigenvalueUpdate& plan,
                                            bool reorthogonalize = false);

/// Full update: eigenvalues, eigenvectors, reconstruction and orthonormality
/// metrics, wall time of the update itself (metric computation excluded).
UpdateResult update_decomposition(const SpectralDecomposition& d, const LowRankUpdate& u,
                                  double tol, bool reorthogonalize = false);

}  // namespace eigmod
