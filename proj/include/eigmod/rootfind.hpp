#pragma once

#include "eigmod/secular.hpp"
#include "eigmod/types.hpp"

namespace eigmod {

/// A finite interval known to contain `expected` roots of a secular
/// function; endpoints must be off-pole (pre-nudged).
struct RootBracket {
  double lo = 0.0;
  double hi = 0.0;
  long expected = 1;
};

struct DncStats {
  std::size_t evaluations = 0;
  std::size_t rounds = 0;  // deepest subdivision level reached
};

inline constexpr int kDncPoints = 8;  // equidistant interior points per round

/// Divide-and-conquer zero finder: samples kDncPoints equidistant interior
/// points, splits at sign changes, recurses; a sub-bracket still owing roots
/// with no sign change keeps subdividing until a sign change appears or its
/// width falls below tol (a tangency is then reported as a repeated root at
/// the |f| minimizer). Roots are returned ascending.
Vec dnc_solve(const SecularCoefficients& c, const RootBracket& b, double tol,
              DncStats* stats = nullptr);

/// Rank-1 fast path: one root per interval on the shifted window, safeguarded
/// bisection on the monotone restriction of f. `tol` is relative.
Vec solve_rank1(const Vec& poles, const Vec& zeta, double sigma, double tol);

/// Default root tolerance: 1e-12 * max(1, spectrum scale).
double default_tolerance(const Vec& lambda, const LowRankUpdate& u);

/// Everything the eigenvalue pipeline learned, kept so the eigenvector stage
/// can reuse the transform and the deflation record.
struct EigenvalueUpdate {
  Vec values;                  // n updated eigenvalues, ascending
  Vec roots;                   // solved secular roots, ascending
  DeflatedProblem problem;     // deflation record
  TransformedUpdate transformed;  // zero columns dropped
};

/// automatic: rank-1 fast path / rank-2 scan / rank-k Sturm by effective
/// rank. sturm: force the Sturm-chain locator regardless of rank.
enum class LocateStrategy { automatic, sturm };

EigenvalueUpdate update_eigenvalues_full(const SpectralDecomposition& d, const LowRankUpdate& u,
                                         double tol,
                                         LocateStrategy strategy = LocateStrategy::automatic);

/// Full eigenvalue pipeline: transform, deflate, locate (rank-1 fast path /
/// rank-2 scan / rank-k Sturm), solve every bracket, merge unchanged
/// eigenvalues; returns the n updated eigenvalues ascending.
Vec update_eigenvalues(const SpectralDecomposition& d, const LowRankUpdate& u, double tol);

}  // namespace eigmod
