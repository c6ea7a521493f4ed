#pragma once

#include "eigmod/types.hpp"

namespace eigmod {

/// f(x) = leading - sum_j weights[j] / (x - poles[j]) with strictly
/// increasing poles. Exact-zero weights are dropped at construction.
struct SecularCoefficients {
  Vec poles;
  Vec weights;
  double leading = 1.0;

  std::size_t size() const { return poles.size(); }
};

SecularCoefficients make_secular(Vec poles, Vec weights, double leading = 1.0);

/// U = Q^T K plus the sign signature of the update.
struct TransformedUpdate {
  Matrix u;                // n x k
  std::vector<int> signs;  // k entries in {+1,-1}

  std::size_t rank() const { return u.cols(); }
  std::size_t dim() const { return u.rows(); }
};

TransformedUpdate transform_update(const SpectralDecomposition& d, const LowRankUpdate& u);

/// Raw per-pole weights alpha_i = w_i^T adj(M_i) J w_i with w_i the i-th row
/// of U, M_i = I_k + J U^T D_i U and D_i = diag over s != i of
/// 1/(lambda_s - lambda_i). For k = 1 this reduces to sigma * zeta_i^2.
/// Requires strictly increasing (pre-deflated) lambda.
Vec secular_weights(const Vec& lambda, const TransformedUpdate& tu);

/// secular_weights wrapped into a SecularCoefficients with leading 1.
SecularCoefficients secular_coefficients(const Vec& lambda, const TransformedUpdate& tu);

/// Evaluates f off-pole, summing in ascending pole order.
double eval_secular(const SecularCoefficients& c, double x);

/// Derivative f'(x) = sum_j weights[j] / (x - poles[j])^2.
double eval_secular_derivative(const SecularCoefficients& c, double x);

/// Counts sign crossings of f over `samples` equidistant cells of (lo, hi);
/// a certified lower bound on the number of roots inside, matching their
/// parity when every root is simple.
long crossing_count(const SecularCoefficients& c, double lo, double hi, int samples);

/// Splits a b^T + b a^T into u1 u1^T - u2 u2^T via the eigendecomposition of
/// [[0,1],[1,0]] applied to the pair (a b).
std::pair<Vec, Vec> rank2_split(const Vec& a, const Vec& b);

/// Preprocessed secular problem: near-equal poles merged (weights combined at
/// the representative), then poles with negligible weight deflated. A
/// deflated pole whose U rows are themselves negligible keeps its eigenpair
/// unchanged; one that still couples (a root collided with the pole) keeps
/// only the eigenvalue, and the eigenvector stage must recompute the vector.
struct DeflatedProblem {
  SecularCoefficients coeffs;
  std::vector<std::size_t> pole_origin;  // original eigen index per surviving pole
  std::vector<std::size_t> unchanged;    // original indices passing through
  std::vector<std::size_t> collided;     // value kept, vector recomputed
};

inline constexpr double kPoleMergeRelGap = 1e-12;
inline constexpr double kWeightDeflationRel = 1e-14;

DeflatedProblem deflate_problem(const Vec& lambda, const TransformedUpdate& tu);

}  // namespace eigmod
