#pragma once

#include <utility>

#include "eigmod/secular.hpp"
#include "eigmod/types.hpp"

namespace eigmod {

/// Root counts per interval cut by the (deflated) poles: counts[i] is the
/// number of new eigenvalues in (d_{i-1}, d_i) with d_{-1} = -inf and
/// d_N = +inf. Sums to the deflated problem size.
struct LocationVector {
  std::vector<long> counts;

  long total() const {
    long s = 0;
    for (long c : counts) s += c;
    return s;
  }
};

/// Sign pattern of a rank-2 update.
enum class ShiftKind { double_right, double_left, mixed };

ShiftKind classify_shift(const std::vector<int>& signs);

/// Rank-2 location by weight-sign parity scans. The scan direction follows
/// the shift kind; ambiguous even-parity intervals are resolved by the
/// interlacing budget and confirmed with a Sturm count.
LocationVector locate_rank2(const SecularCoefficients& c0, ShiftKind kind);

/// Interlacing window for the index-th updated eigenvalue (1-based): with p
/// positive and m negative update directions, lambda' in
/// [lambda_{index-m}, lambda_{index+p}], out-of-range indices mapping to
/// -/+infinity.
std::pair<double, double> interlacing_bounds(std::size_t index, const Vec& lambda,
                                             std::size_t rank, const std::vector<int>& signs);

/// General rank-k location. Parity plus the interlacing budget decides most
/// intervals; genuinely ambiguous ones are counted with the Sturm chain. If
/// the chain cannot settle an interval (partial chain), the roots are solved
/// outright via the restart machinery and `solved` is set.
struct LocateResult {
  LocationVector loc;
  Vec roots;           // filled when solved
  bool solved = false;
};

LocateResult locate_rank_k(const SecularCoefficients& c0, const std::vector<int>& signs);

}  // namespace eigmod
