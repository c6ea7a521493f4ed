#pragma once

#include <cstdint>
#include <utility>

#include "eigmod/types.hpp"

namespace eigmod {

/// Q diag(lambda) Q^T, explicitly symmetrized.
SymmetricDense reconstruct(const SpectralDecomposition& d);

/// a + sum_r signs[r] * k_r k_r^T, symmetrized.
SymmetricDense apply_update(const SymmetricDense& a, const LowRankUpdate& u);

/// Deterministic seeded instance: Q is the orthogonal factor of a Gaussian
/// matrix (R diagonal made positive), lambda ~ U[-1,1] sorted with adjacent
/// gaps nudged to at least 1e-6, K Gaussian rescaled to the exact Frobenius
/// norm, signs all +1.
std::pair<SpectralDecomposition, LowRankUpdate> random_instance(std::size_t n, std::size_t k,
                                                                double target_norm,
                                                                std::uint64_t seed);

/// Minimum adjacent eigenvalue gap enforced by random_instance.
inline constexpr double kMinEigenGap = 1e-6;

}  // namespace eigmod
