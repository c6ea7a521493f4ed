#pragma once

// Shared oracle helpers for the unit suites: independent interval
// classification against the Jacobi baseline.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "eigmod/baseline.hpp"
#include "eigmod/core.hpp"
#include "eigmod/types.hpp"

namespace testutil {

inline eigmod::LowRankUpdate with_signs(eigmod::LowRankUpdate u, std::vector<int> signs) {
  u.signs = std::move(signs);
  return u;
}

/// Eigenvalues of A + K J K^T by the Jacobi oracle.
inline eigmod::Vec oracle_eigenvalues(const eigmod::SpectralDecomposition& d,
                                      const eigmod::LowRankUpdate& u) {
  const eigmod::SymmetricDense target = eigmod::apply_update(eigmod::reconstruct(d), u);
  return eigmod::jacobi_evd(target).lambda;
}

/// Counts values per interval cut by ascending poles: slot i covers
/// (poles[i-1], poles[i]).
inline std::vector<long> classify_intervals(const eigmod::Vec& poles,
                                            const eigmod::Vec& values) {
  std::vector<long> counts(poles.size() + 1, 0);
  for (double v : values) {
    const std::size_t idx =
        std::upper_bound(poles.begin(), poles.end(), v) - poles.begin();
    ++counts[idx];
  }
  return counts;
}

}  // namespace testutil
