#pragma once

#include "eigmod/types.hpp"

namespace eigmod {

struct JacobiConfig {
  double tol = 1e-12;   // off-diagonal Frobenius mass relative to ||a||_F
  int max_sweeps = 60;
};

/// Dense symmetric eigensolver by cyclic-by-row Jacobi rotations. Serves as
/// the independent correctness oracle and the direct-decomposition timing
/// baseline; deliberately self-contained and single-threaded per instance.
SpectralDecomposition jacobi_evd(const SymmetricDense& a, const JacobiConfig& cfg = {});

/// First-order perturbation estimate (no iteration, no higher-order terms):
///   lambda_j' = lambda_j + (K^T v_j)^T J (K^T v_j)
///   v_j'      = v_j + sum_{i != j} [(K^T v_i)^T J (K^T v_j) / (lambda_j - lambda_i)] v_i
/// followed by column normalization.
SpectralDecomposition perturbation_update(const SpectralDecomposition& d, const LowRankUpdate& u);

}  // namespace eigmod
