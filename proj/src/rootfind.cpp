#include "eigmod/rootfind.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "eigmod/kernels.hpp"
#include "eigmod/locate.hpp"
#include "eigmod/sturm.hpp"

namespace eigmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxEvalsPerBracket = 1u << 22;

double pole_scale(const Vec& poles) {
  double s = 1.0;
  for (double p : poles) s = std::max(s, std::fabs(p));
  return s;
}

double residual_scale(const SecularCoefficients& c, double x) {
  double mass = 0.0, dist = kInf;
  for (std::size_t j = 0; j < c.size(); ++j) {
    mass += std::fabs(c.weights[j]);
    dist = std::min(dist, std::fabs(x - c.poles[j]));
  }
  return 1.0 + mass / std::max(dist, 1e-300);
}

// Guarded Newton cleanup of a converged root; keeps the best |f| iterate
// inside [lo, hi]. Skipped near tangencies (tiny derivative).
double newton_polish(const SecularCoefficients& c, double x, double lo, double hi) {
  double best = x;
  double fbest = std::fabs(eval_secular(c, x));
  for (int it = 0; it < 3; ++it) {
    const double f = eval_secular(c, best);
    const double fp = eval_secular_derivative(c, best);
    if (!std::isfinite(fp) || std::fabs(fp) < 1e-300) break;
    double next = best - f / fp;
    if (!(next > lo && next < hi)) break;
    const double fnext = std::fabs(eval_secular(c, next));
    if (fnext >= fbest) break;
    best = next;
    fbest = fnext;
  }
  return best;
}

// Bracketed scalar solve: bisection with a secant/inverse-quadratic
// accelerator, never leaving the bracket.
double refine_bracketed(const SecularCoefficients& c, double a, double fa, double b, double fb,
                        double tol, std::size_t& evals) {
  double lo = a, flo = fa, hi = b, fhi = fb;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    // secant proposal from the endpoints, safeguarded to the middle half
    double prop = hi - fhi * (hi - lo) / (fhi - flo);
    const double mid = 0.5 * (lo + hi);
    if (!std::isfinite(prop) || prop <= lo || prop >= hi) prop = mid;
    // alternate with bisection so progress is guaranteed
    if (it % 2 == 1) prop = mid;
    const double fp = eval_secular(c, prop);
    ++evals;
    if (fp == 0.0) return prop;
    if ((fp < 0) == (flo < 0)) {
      lo = prop;
      flo = fp;
    } else {
      hi = prop;
      fhi = fp;
    }
    x = 0.5 * (lo + hi);
  }
  return newton_polish(c, x, lo, hi);
}

struct Segment {
  double lo, hi, flo, fhi;
  std::size_t depth;
  bool schange;
};

}  // namespace

Vec dnc_solve(const SecularCoefficients& c, const RootBracket& b, double tol, DncStats* stats) {
  if (!(b.lo < b.hi)) throw std::invalid_argument("dnc_solve: empty bracket");
  if (b.expected < 1) throw std::invalid_argument("dnc_solve: expected must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("dnc_solve: tol must be positive");

  std::size_t evals = 0;
  std::size_t max_depth = 0;
  auto f = [&](double x) {
    ++evals;
    return eval_secular(c, x);
  };

  // Lipschitz bound for f on [a, b]; poles never sit inside a bracket.
  auto slope_bound = [&](double a, double bb) {
    double l = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double p = c.poles[j];
      double dist;
      if (p <= a)
        dist = a - p;
      else if (p >= bb)
        dist = p - bb;
      else
        return kInf;
      if (dist <= 0.0) return kInf;
      l += std::fabs(c.weights[j]) / (dist * dist);
    }
    return l;
  };

  std::deque<Segment> work;
  std::size_t pending_sign = 0;
  Vec roots;

  auto push_segment = [&](double lo, double flo, double hi, double fhi, std::size_t depth) {
    const bool schange = (flo < 0.0) != (fhi < 0.0);
    if (!schange) {
      const double l = slope_bound(lo, hi);
      if (std::min(std::fabs(flo), std::fabs(fhi)) > l * (hi - lo)) return;  // provably root-free
    }
    Segment s{lo, hi, flo, fhi, depth, schange};
    if (schange) {
      work.push_front(s);
      ++pending_sign;
    } else {
      work.push_back(s);
    }
    max_depth = std::max(max_depth, depth);
  };

  {
    double lo = b.lo, hi = b.hi;
    double flo = f(lo), fhi = f(hi);
    for (int t = 0; t < 4 && flo == 0.0; ++t) {
      lo += tol / 8.0;
      flo = f(lo);
    }
    for (int t = 0; t < 4 && fhi == 0.0; ++t) {
      hi -= tol / 8.0;
      fhi = f(hi);
    }
    push_segment(lo, flo, hi, fhi, 0);
  }

  while (!work.empty()) {
    const long needed = b.expected - static_cast<long>(roots.size());
    if (needed <= 0) break;  // tangency noise can fake extra crossings
    if (evals > kMaxEvalsPerBracket)
      throw NumericalError("rootfind", "evaluation budget exhausted in bracket");

    Segment seg = work.front();
    work.pop_front();
    if (seg.schange) --pending_sign;
    if (!seg.schange && needed <= 0) continue;

    if (seg.schange && static_cast<long>(pending_sign) + 1 >= needed) {
      // Every pending sign-change segment holds exactly one root.
      roots.push_back(refine_bracketed(c, seg.lo, seg.flo, seg.hi, seg.fhi, tol, evals));
      continue;
    }

    if (seg.hi - seg.lo < tol) {
      const double mid = 0.5 * (seg.lo + seg.hi);
      if (seg.schange) {
        roots.push_back(newton_polish(c, mid, seg.lo, seg.hi));
      } else {
        double fmid;
        try {
          fmid = f(mid);
        } catch (const std::invalid_argument&) {
          continue;
        }
        double xstar = mid, fstar = std::fabs(fmid);
        if (std::fabs(seg.flo) < fstar) {
          xstar = seg.lo;
          fstar = std::fabs(seg.flo);
        }
        if (std::fabs(seg.fhi) < fstar) {
          xstar = seg.hi;
          fstar = std::fabs(seg.fhi);
        }
        // Tangency: an even pair collapsed below tol.
        if (fstar <= std::sqrt(tol) * residual_scale(c, xstar)) {
          const long take = std::min<long>(2, needed);
          for (long t = 0; t < take; ++t) roots.push_back(xstar);
        }
      }
      continue;
    }

    // Subdivide at kDncPoints equidistant interior points.
    double xs[kDncPoints + 2];
    double fs[kDncPoints + 2];
    xs[0] = seg.lo;
    fs[0] = seg.flo;
    xs[kDncPoints + 1] = seg.hi;
    fs[kDncPoints + 1] = seg.fhi;
    const double h = (seg.hi - seg.lo) / (kDncPoints + 1);
    for (int i = 1; i <= kDncPoints; ++i) {
      xs[i] = seg.lo + h * i;
      fs[i] = f(xs[i]);
      if (fs[i] == 0.0) {
        xs[i] += h * 1e-9;
        fs[i] = f(xs[i]);
      }
    }
    for (int i = 0; i <= kDncPoints; ++i) push_segment(xs[i], fs[i], xs[i + 1], fs[i + 1], seg.depth + 1);
  }

  if (stats) {
    stats->evaluations = evals;
    stats->rounds = max_depth;
  }
  std::sort(roots.begin(), roots.end());
  if (static_cast<long>(roots.size()) < b.expected)
    throw NumericalError("rootfind",
                         "bracket [" + std::to_string(b.lo) + ", " + std::to_string(b.hi) +
                             "] resolved " + std::to_string(roots.size()) + " of " +
                             std::to_string(b.expected) + " roots");
  return roots;
}

Vec solve_rank1(const Vec& poles, const Vec& zeta, double sigma, double tol) {
  const std::size_t n = poles.size();
  if (zeta.size() != n || n == 0) throw std::invalid_argument("solve_rank1: bad inputs");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(poles[i] < poles[i + 1]))
      throw std::invalid_argument("solve_rank1: poles not strictly increasing");
  if (sigma == 0.0) return poles;
  for (double z : zeta)
    if (z == 0.0) throw std::invalid_argument("solve_rank1: zero zeta (deflate first)");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_rank1: tol must be positive");

  SecularCoefficients c;
  c.leading = 1.0;
  c.poles = poles;
  c.weights.resize(n);
  double znorm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c.weights[i] = sigma * zeta[i] * zeta[i];
    znorm2 += zeta[i] * zeta[i];
  }
  const double shift = std::fabs(sigma) * znorm2;
  const bool up = sigma > 0.0;

  // Monotone bisection on one pole-free interval; f rises through the root
  // for sigma > 0 and falls for sigma < 0.
  auto solve_interval = [&](double left, double right) {
    double gap = right - left;
    double delta = gap * 1e-9;
    double lo = left + delta, hi = right - delta;
    double flo = eval_secular(c, lo), fhi = eval_secular(c, hi);
    const double want_lo = up ? -1.0 : 1.0;
    for (int t = 0; t < 6 && flo * want_lo <= 0.0; ++t) {
      delta /= 1024.0;
      lo = left + delta;
      flo = eval_secular(c, lo);
    }
    for (int t = 0; t < 6 && fhi * want_lo >= 0.0; ++t) {
      delta /= 1024.0;
      hi = right - delta;
      fhi = eval_secular(c, hi);
    }
    if (flo * want_lo > 0.0 && fhi * want_lo < 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= tol * std::max(1.0, std::fabs(mid))) break;
        const double fm = eval_secular(c, mid);
        if (fm * want_lo > 0.0)
          lo = mid;
        else
          hi = mid;
      }
    }
    // Root hiding inside the endpoint margin collapses the bracket there.
    return newton_polish(c, 0.5 * (lo + hi), left, right);
  };

  Vec roots;
  roots.reserve(n);
  if (up) {
    for (std::size_t i = 0; i + 1 < n; ++i) roots.push_back(solve_interval(poles[i], poles[i + 1]));
    double right = poles[n - 1] + shift * (1.0 + 1e-9) + 1e-12;
    for (int t = 0; t < 64 && eval_secular(c, right) <= 0.0; ++t)
      right += std::max(1.0, shift);
    roots.push_back(solve_interval(poles[n - 1], right));
  } else {
    double left = poles[0] - shift * (1.0 + 1e-9) - 1e-12;
    for (int t = 0; t < 64 && eval_secular(c, left) <= 0.0; ++t)
      left -= std::max(1.0, shift);
    roots.push_back(solve_interval(left, poles[0]));
    for (std::size_t i = 1; i < n; ++i) roots.push_back(solve_interval(poles[i - 1], poles[i]));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double default_tolerance(const Vec& lambda, const LowRankUpdate& u) {
  double scale = 1.0;
  for (double l : lambda) scale = std::max(scale, std::fabs(l));
  const double kn = kernels::frobenius_norm(u.kmat);
  scale = std::max(scale, kn * kn);
  return 1e-12 * scale;
}

namespace {

// Drops columns with negligible norm (they contribute nothing to the
// perturbation), shrinking the effective rank.
TransformedUpdate drop_zero_columns(const TransformedUpdate& tu) {
  const std::size_t n = tu.dim(), k = tu.rank();
  Vec colnorm(k, 0.0);
  double maxnorm = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += tu.u(i, j) * tu.u(i, j);
    colnorm[j] = std::sqrt(s);
    maxnorm = std::max(maxnorm, colnorm[j]);
  }
  const double drop = 1e-15 * std::max(1.0, maxnorm);
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < k; ++j)
    if (colnorm[j] > drop) keep.push_back(j);
  if (keep.size() == k) return tu;
  TransformedUpdate out;
  out.u = Matrix(n, keep.size());
  for (std::size_t jj = 0; jj < keep.size(); ++jj) {
    out.signs.push_back(tu.signs[keep[jj]]);
    for (std::size_t i = 0; i < n; ++i) out.u(i, jj) = tu.u(i, keep[jj]);
  }
  return out;
}

Vec solve_brackets(const SecularCoefficients& coeffs, const LocationVector& loc,
                   double clip_lo, double clip_hi, double tol) {
  const std::size_t m = coeffs.size();
  const double scale = pole_scale(coeffs.poles);
  std::vector<RootBracket> brackets;
  for (std::size_t i = 0; i <= m; ++i) {
    if (loc.counts[i] < 1) continue;
    double lo = (i == 0) ? clip_lo : coeffs.poles[i - 1];
    double hi = (i == m) ? clip_hi : coeffs.poles[i];
    const double gap = hi - lo;
    const double nudge = std::min(1e-12 * scale, gap / 8.0);
    if (i != 0) lo += nudge;
    if (i != m) hi -= nudge;
    brackets.push_back(RootBracket{lo, hi, loc.counts[i]});
  }

  std::vector<Vec> per_bracket(brackets.size());
  std::vector<std::string> errors(brackets.size());
  const bool par = kernels::parallel();
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(brackets.size()); ++i) {
    try {
      per_bracket[i] = dnc_solve(coeffs, brackets[i], tol);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw NumericalError("solve", e);

  Vec roots;
  for (const Vec& rs : per_bracket)
    for (double r : rs) roots.push_back(r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

EigenvalueUpdate update_eigenvalues_full(const SpectralDecomposition& d, const LowRankUpdate& u,
                                         double tol, LocateStrategy strategy) {
  validate_update(d, u);
  if (!(tol > 0.0)) throw std::invalid_argument("update_eigenvalues: tol must be positive");
  const std::size_t n = d.size();

  EigenvalueUpdate out;
  try {
    out.transformed = drop_zero_columns(transform_update(d, u));
  } catch (const std::invalid_argument& e) {
    throw NumericalError("transform", e.what());
  }

  if (out.transformed.rank() == 0) {
    out.values = d.lambda;
    out.problem.unchanged.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.problem.unchanged[i] = i;
    return out;
  }

  try {
    out.problem = deflate_problem(d.lambda, out.transformed);
  } catch (const std::exception& e) {
    throw NumericalError("deflate", e.what());
  }

  const SecularCoefficients& coeffs = out.problem.coeffs;
  if (coeffs.size() > 0) {
    const std::size_t k = out.transformed.rank();
    double scale = pole_scale(coeffs.poles);

    if (k == 1 && strategy == LocateStrategy::automatic) {
      const double sigma = out.transformed.signs[0];
      Vec zeta(coeffs.size());
      for (std::size_t i = 0; i < coeffs.size(); ++i)
        zeta[i] = std::sqrt(std::fabs(coeffs.weights[i]));
      try {
        out.roots = solve_rank1(coeffs.poles, zeta, sigma, tol / std::max(1.0, scale));
      } catch (const std::exception& e) {
        throw NumericalError("solve", e.what());
      }
    } else {
      LocationVector loc;
      Vec presolved;
      bool solved = false;
      try {
        if (k == 2 && strategy == LocateStrategy::automatic) {
          loc = locate_rank2(coeffs, classify_shift(out.transformed.signs));
        } else {
          LocateResult lr = locate_rank_k(coeffs, out.transformed.signs);
          loc = lr.loc;
          presolved = std::move(lr.roots);
          solved = lr.solved;
        }
      } catch (const std::exception& e) {
        throw NumericalError("locate", e.what());
      }

      if (solved) {
        out.roots = std::move(presolved);
      } else {
        const double kn = kernels::frobenius_norm(u.kmat);
        const double knorm2 = kn * kn;
        const double pad = std::max(1e-9 * scale, 4.0 * tol);
        double clip_lo = d.lambda.front() - knorm2 - pad;
        double clip_hi = d.lambda.back() + knorm2 + pad;
        for (int t = 0; t < 64 && eval_secular(coeffs, clip_hi) <= 0.0; ++t)
          clip_hi += std::max(1.0, knorm2);
        for (int t = 0; t < 64 && eval_secular(coeffs, clip_lo) <= 0.0; ++t)
          clip_lo -= std::max(1.0, knorm2);
        try {
          out.roots = solve_brackets(coeffs, loc, clip_lo, clip_hi, tol);
        } catch (const NumericalError&) {
          // Bracket-level failure: fall back to the restart machinery.
          RootAccount acc = count_all_roots(coeffs);
          if (!acc.solved)
            throw;
          out.roots = std::move(acc.roots);
        }
      }
    }
  }

  out.values = out.roots;
  for (std::size_t idx : out.problem.unchanged) out.values.push_back(d.lambda[idx]);
  for (std::size_t idx : out.problem.collided) out.values.push_back(d.lambda[idx]);
  std::sort(out.values.begin(), out.values.end());
  if (out.values.size() != n)
    throw NumericalError("merge", "accounted " + std::to_string(out.values.size()) +
                                      " eigenvalues of " + std::to_string(n));
  return out;
}

Vec update_eigenvalues(const SpectralDecomposition& d, const LowRankUpdate& u, double tol) {
  return update_eigenvalues_full(d, u, tol).values;
}

}  // namespace eigmod
