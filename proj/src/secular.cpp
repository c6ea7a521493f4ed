#include "eigmod/secular.hpp"

#include <cmath>
#include <numeric>

#include "eigmod/kernels.hpp"

namespace eigmod {

namespace {

// LU with partial pivoting; returns false on a structurally zero pivot.
// det receives the determinant either way.
bool lu_factor(Matrix& m, std::vector<std::size_t>& piv, double& det) {
  const std::size_t k = m.rows();
  piv.resize(k);
  std::iota(piv.begin(), piv.end(), 0);
  det = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t best = col;
    for (std::size_t i = col + 1; i < k; ++i)
      if (std::fabs(m(i, col)) > std::fabs(m(best, col))) best = i;
    if (best != col) {
      for (std::size_t j = 0; j < k; ++j) std::swap(m(col, j), m(best, j));
      std::swap(piv[col], piv[best]);
      det = -det;
    }
    const double pivot = m(col, col);
    det *= pivot;
    if (pivot == 0.0) return false;
    for (std::size_t i = col + 1; i < k; ++i) {
      const double f = m(i, col) / pivot;
      m(i, col) = f;
      for (std::size_t j = col + 1; j < k; ++j) m(i, j) -= f * m(col, j);
    }
  }
  return true;
}

double det_by_lu(Matrix m) {
  std::vector<std::size_t> piv;
  double det;
  lu_factor(m, piv, det);
  return det;
}

// Adjugate of a small k x k matrix: explicit cofactors for k <= 3, LU-based
// det*inverse with a cofactor fallback for larger k.
Matrix adjugate(const Matrix& m) {
  const std::size_t k = m.rows();
  Matrix adj(k, k);
  if (k == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  if (k == 2) {
    adj(0, 0) = m(1, 1);
    adj(0, 1) = -m(0, 1);
    adj(1, 0) = -m(1, 0);
    adj(1, 1) = m(0, 0);
    return adj;
  }
  if (k == 3) {
    adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return adj;
  }

  Matrix lu = m;
  std::vector<std::size_t> piv;
  double det;
  double maxpiv = 0.0, minpiv = 0.0;
  if (lu_factor(lu, piv, det)) {
    maxpiv = std::fabs(lu(0, 0));
    minpiv = maxpiv;
    for (std::size_t i = 1; i < k; ++i) {
      maxpiv = std::max(maxpiv, std::fabs(lu(i, i)));
      minpiv = std::min(minpiv, std::fabs(lu(i, i)));
    }
  }
  if (minpiv > 1e-8 * maxpiv) {
    // adj = det * inv(M): solve M x = det * e_j for each column.
    for (std::size_t j = 0; j < k; ++j) {
      Vec x(k, 0.0);
      for (std::size_t i = 0; i < k; ++i)
        if (piv[i] == j) x[i] = det;
      for (std::size_t i = 1; i < k; ++i)
        for (std::size_t l = 0; l < i; ++l) x[i] -= lu(i, l) * x[l];
      for (std::size_t ii = k; ii-- > 0;) {
        for (std::size_t l = ii + 1; l < k; ++l) x[ii] -= lu(ii, l) * x[l];
        x[ii] /= lu(ii, ii);
      }
      for (std::size_t i = 0; i < k; ++i) adj(i, j) = x[i];
    }
    return adj;
  }

  // Near-singular: cofactor expansion with per-minor LU determinants.
  Matrix minor(k - 1, k - 1);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t mr = 0;
      for (std::size_t r = 0; r < k; ++r) {
        if (r == i) continue;
        std::size_t mc = 0;
        for (std::size_t c = 0; c < k; ++c) {
          if (c == j) continue;
          minor(mr, mc) = m(r, c);
          ++mc;
        }
        ++mr;
      }
      const double cof = (((i + j) % 2) ? -1.0 : 1.0) * det_by_lu(minor);
      adj(j, i) = cof;  // adjugate is the transposed cofactor matrix
    }
  return adj;
}

void require_strictly_increasing(const Vec& poles, const char* who) {
  for (std::size_t i = 0; i + 1 < poles.size(); ++i)
    if (!(poles[i] < poles[i + 1]))
      throw std::invalid_argument(std::string(who) + ": poles not strictly increasing");
  for (double p : poles)
    if (!std::isfinite(p)) throw std::invalid_argument(std::string(who) + ": non-finite pole");
}

}  // namespace

SecularCoefficients make_secular(Vec poles, Vec weights, double leading) {
  if (poles.size() != weights.size())
    throw std::invalid_argument("make_secular: poles/weights size mismatch");
  require_strictly_increasing(poles, "make_secular");
  for (double w : weights)
    if (!std::isfinite(w)) throw std::invalid_argument("make_secular: non-finite weight");
  if (!std::isfinite(leading)) throw std::invalid_argument("make_secular: non-finite leading");
  SecularCoefficients c;
  c.leading = leading;
  c.poles.reserve(poles.size());
  c.weights.reserve(poles.size());
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (weights[i] == 0.0) continue;
    c.poles.push_back(poles[i]);
    c.weights.push_back(weights[i]);
  }
  return c;
}

TransformedUpdate transform_update(const SpectralDecomposition& d, const LowRankUpdate& u) {
  if (u.dim() != d.size()) throw std::invalid_argument("transform_update: dimension mismatch");
  TransformedUpdate tu;
  tu.u = kernels::gemm_tn(d.q, u.kmat);
  tu.signs = u.signs;
  return tu;
}

namespace {

// Shared weight machinery: per-group weights where `groups` partitions the
// pole indices into runs of (near-)equal values and `rep` holds one
// representative value per group.
Vec group_weights(const Vec& rep, const std::vector<std::vector<std::size_t>>& groups,
                  const Matrix& u, const std::vector<int>& signs) {
  const std::size_t k = u.cols();
  const std::size_t ng = groups.size();
  Vec alpha(ng, 0.0);
  const bool par = kernels::parallel();
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(ng); ++g) {
    // M_g = I + J * sum_{s outside group g} w_s w_s^T / (rep_s' - rep_g)
    Matrix m = Matrix::identity(k);
    for (std::size_t h = 0; h < ng; ++h) {
      if (h == static_cast<std::size_t>(g)) continue;
      const double inv_gap = 1.0 / (rep[h] - rep[g]);
      for (std::size_t s : groups[h]) {
        const double* ws = u.row(s);
        for (std::size_t r = 0; r < k; ++r) {
          const double f = signs[r] * ws[r] * inv_gap;
          for (std::size_t c = 0; c < k; ++c) m(r, c) += f * ws[c];
        }
      }
    }
    const Matrix adj = adjugate(m);
    double a = 0.0;
    for (std::size_t s : groups[g]) {
      const double* ws = u.row(s);
      for (std::size_t r = 0; r < k; ++r) {
        double t = 0.0;
        for (std::size_t c = 0; c < k; ++c) t += adj(r, c) * signs[c] * ws[c];
        a += ws[r] * t;
      }
    }
    alpha[g] = a;
  }
  return alpha;
}

}  // namespace

Vec secular_weights(const Vec& lambda, const TransformedUpdate& tu) {
  if (tu.rank() < 1) throw std::invalid_argument("secular_weights: k = 0");
  if (tu.dim() != lambda.size())
    throw std::invalid_argument("secular_weights: dimension mismatch");
  if (tu.signs.size() != tu.rank())
    throw std::invalid_argument("secular_weights: signs size mismatch");
  require_strictly_increasing(lambda, "secular_weights");

  std::vector<std::vector<std::size_t>> groups(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) groups[i] = {i};
  return group_weights(lambda, groups, tu.u, tu.signs);
}

SecularCoefficients secular_coefficients(const Vec& lambda, const TransformedUpdate& tu) {
  return make_secular(lambda, secular_weights(lambda, tu), 1.0);
}

double eval_secular(const SecularCoefficients& c, double x) {
  double f = c.leading;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double gap = x - c.poles[j];
    if (std::fabs(gap) < 1e-300)
      throw std::invalid_argument("eval_secular: evaluation at a pole");
    f -= c.weights[j] / gap;
  }
  return f;
}

double eval_secular_derivative(const SecularCoefficients& c, double x) {
  double f = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double gap = x - c.poles[j];
    if (std::fabs(gap) < 1e-300)
      throw std::invalid_argument("eval_secular_derivative: evaluation at a pole");
    f += c.weights[j] / (gap * gap);
  }
  return f;
}

long crossing_count(const SecularCoefficients& c, double lo, double hi, int samples) {
  if (!(lo < hi) || samples < 1) throw std::invalid_argument("crossing_count: bad range");
  long crossings = 0;
  double prev = 0.0;
  bool have_prev = false;
  for (int s = 0; s <= samples; ++s) {
    const double x = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(samples);
    double f;
    try {
      f = eval_secular(c, x);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (f == 0.0) continue;
    if (have_prev && (prev < 0.0) != (f < 0.0)) ++crossings;
    prev = f;
    have_prev = true;
  }
  return crossings;
}

std::pair<Vec, Vec> rank2_split(const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("rank2_split: bad input vectors");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Vec u1(a.size()), u2(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    u1[i] = (a[i] + b[i]) * inv_sqrt2;
    u2[i] = (a[i] - b[i]) * inv_sqrt2;
  }
  return {std::move(u1), std::move(u2)};
}

DeflatedProblem deflate_problem(const Vec& lambda, const TransformedUpdate& tu) {
  const std::size_t n = lambda.size();
  if (tu.dim() != n) throw std::invalid_argument("deflate_problem: dimension mismatch");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(lambda[i] <= lambda[i + 1]))
      throw std::invalid_argument("deflate_problem: eigenvalues not ascending");

  double scale = 1.0;
  for (double l : lambda) scale = std::max(scale, std::fabs(l));
  const double merge_gap = kPoleMergeRelGap * scale;

  // Runs of near-equal poles become one group.
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (!groups.empty() && lambda[i] - lambda[groups.back().back()] < merge_gap)
      groups.back().push_back(i);
    else
      groups.push_back({i});
  }
  Vec rep(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double s = 0.0;
    for (std::size_t i : groups[g]) s += lambda[i];
    rep[g] = s / static_cast<double>(groups[g].size());
  }

  const Vec alpha = group_weights(rep, groups, tu.u, tu.signs);

  double alpha_mass = 0.0;
  for (double a : alpha) alpha_mass += std::fabs(a);
  const double drop = kWeightDeflationRel * (1.0 + alpha_mass);

  double u_mass = 0.0;
  {
    const double fn = kernels::frobenius_norm(tu.u);
    u_mass = fn * fn;
  }

  DeflatedProblem out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (std::fabs(alpha[g]) <= drop) {
      // A vanishing weight comes either from vanishing U rows (eigenpair
      // exactly preserved) or from a root colliding with the pole.
      double row_mass = 0.0;
      for (std::size_t i : groups[g])
        for (std::size_t r = 0; r < tu.rank(); ++r) row_mass += tu.u(i, r) * tu.u(i, r);
      if (row_mass <= 1e-12 * (1.0 + u_mass)) {
        for (std::size_t i : groups[g]) out.unchanged.push_back(i);
      } else {
        out.collided.push_back(groups[g].front());
        for (std::size_t m = 1; m < groups[g].size(); ++m)
          out.unchanged.push_back(groups[g][m]);
      }
      continue;
    }
    out.coeffs.poles.push_back(rep[g]);
    out.coeffs.weights.push_back(alpha[g]);
    out.pole_origin.push_back(groups[g].front());
    for (std::size_t m = 1; m < groups[g].size(); ++m) out.unchanged.push_back(groups[g][m]);
  }
  out.coeffs.leading = 1.0;
  return out;
}

}  // namespace eigmod
