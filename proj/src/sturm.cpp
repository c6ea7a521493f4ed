#include "eigmod/sturm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eigmod/rootfind.hpp"

namespace eigmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pole_scale(const Vec& poles) {
  double s = 1.0;
  for (double p : poles) s = std::max(s, std::fabs(p));
  return s;
}

double secular_part(const SturmStep& s, double x) {
  double f = s.c;
  for (std::size_t j = 0; j < s.poles.size(); ++j) f -= s.weights[j] / (x - s.poles[j]);
  return f;
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Rescale a freshly produced step into a moderate magnitude range. Positive
// scaling leaves every chain sign unchanged.
void normalize_step(SturmStep& s) {
  double mag = std::fabs(s.c);
  for (double w : s.weights) mag = std::max(mag, std::fabs(w));
  if (mag == 0.0) return;
  if (mag > 1e6 || mag < 1e-6) {
    const double g = 1.0 / mag;
    s.c *= g;
    for (double& w : s.weights) w *= g;
    s.scale *= g;
  }
}

}  // namespace

double eval_sturm_step(const SturmStep& s, double x) {
  double prod = 1.0;
  for (double p : s.poles) prod *= (x - p);
  return secular_part(s, x) * prod;
}

int sturm_step_sign(const SturmStep& s, double x) {
  if (x == kInf) return sign_of(s.c);
  if (x == -kInf) return (s.poles.size() % 2 == 0) ? sign_of(s.c) : -sign_of(s.c);
  double xx = x;
  const double nudge = 1e-12 * pole_scale(s.poles);
  for (double p : s.poles)
    if (std::fabs(xx - p) < 1e-300) xx = p + nudge;
  std::size_t above = 0;
  for (double p : s.poles)
    if (p > xx) ++above;
  const int parity = (above % 2 == 0) ? 1 : -1;
  return parity * sign_of(secular_part(s, xx));
}

std::pair<SturmStep, SturmStep> chain_start(const SecularCoefficients& c0) {
  if (std::fabs(c0.leading - 1.0) > 1e-12)
    throw std::invalid_argument("chain_start: leading constant must be 1");
  const std::size_t n = c0.size();
  if (n == 0) throw std::invalid_argument("chain_start: empty coefficients");

  SturmStep s0;
  s0.m = 0;
  s0.c = 1.0;
  s0.weights = c0.weights;
  s0.poles = c0.poles;

  // mu_j = 1 - sum_{i != j} (alpha_i + alpha_j) / (d_j - d_i); p_1 has the
  // largest pole dropped, with alpha_j^{1} = (d_last - d_j) mu_j.
  Vec mu(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      s += (c0.weights[i] + c0.weights[j]) / (c0.poles[j] - c0.poles[i]);
    }
    mu[j] = 1.0 - s;
  }

  SturmStep s1;
  s1.m = 1;
  s1.c = 0.0;
  for (double m : mu) s1.c += m;
  const double d_last = c0.poles.back();
  s1.poles.assign(c0.poles.begin(), c0.poles.end() - 1);
  s1.weights.resize(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) s1.weights[j] = (d_last - c0.poles[j]) * mu[j];
  normalize_step(s1);
  return {std::move(s0), std::move(s1)};
}

std::optional<SturmStep> long_division(const SturmStep& prev2, const SturmStep& prev1,
                                       double eps_c) {
  if (prev2.poles.size() != prev1.poles.size() + 1)
    throw std::invalid_argument("long_division: steps do not share poles minus the largest");
  if (std::fabs(prev1.c) <= eps_c) return std::nullopt;

  const Vec& p2 = prev2.poles;
  const Vec& p1 = prev1.poles;
  const std::size_t big = p2.size();  // degree of p_{m-2}

  const double a_div = prev2.c / prev1.c;
  double sum_w2 = 0.0, sum_w1 = 0.0;
  for (double w : prev2.weights) sum_w2 += w;
  for (double w : prev1.weights) sum_w1 += w;
  const double d_drop = p2.back();
  const double b_div = d_drop + sum_w2 / prev2.c - sum_w1 / prev1.c;

  SturmStep out;
  out.m = prev1.m + 1;
  out.a_div = a_div;
  out.b_div = b_div;
  out.poles.assign(p1.begin(), p1.end() - 1);
  const double e1 = d_drop;        // pole dropped from p_{m-2} to p_{m-1}
  const double e2 = p1.back();     // pole dropped from p_{m-1} to p_m

  // Exact secular-form recovery of -p_{m-2} + A (x - B) p_{m-1}: the new
  // weights follow from evaluating both sides at each remaining pole
  // (p_m(d_j) = -alpha_j^{m} prod_{t != j}(d_j - d_t)), the new leading
  // constant from matching the x^{deg} coefficient.
  out.weights.resize(out.poles.size());
  for (std::size_t j = 0; j < out.poles.size(); ++j) {
    const double dj = out.poles[j];
    out.weights[j] = -prev2.weights[j] * (dj - e1) * (dj - e2) +
                     a_div * (dj - b_div) * (dj - e2) * prev1.weights[j];
  }

  double sig1_p2 = 0.0, sq_p2 = 0.0;
  for (double d : p2) {
    sig1_p2 += d;
    sq_p2 += d * d;
  }
  const double sig2_p2 = 0.5 * (sig1_p2 * sig1_p2 - sq_p2);
  double t2 = prev2.c * sig2_p2;
  for (std::size_t s = 0; s < big; ++s) t2 += prev2.weights[s] * (sig1_p2 - p2[s]);

  double sig1_p1 = 0.0, sq_p1 = 0.0;
  for (double d : p1) {
    sig1_p1 += d;
    sq_p1 += d * d;
  }
  const double sig2_p1 = 0.5 * (sig1_p1 * sig1_p1 - sq_p1);
  const double b1 = -prev1.c * sig1_p1 - sum_w1;
  double b2 = prev1.c * sig2_p1;
  for (std::size_t s = 0; s < p1.size(); ++s) b2 += prev1.weights[s] * (sig1_p1 - p1[s]);

  out.c = -t2 + a_div * (b2 - b_div * b1);
  normalize_step(out);
  return out;
}

SturmChain build_chain(const SecularCoefficients& c0) {
  SturmChain chain;
  chain.n_poles = c0.size();
  if (c0.size() == 0) {
    SturmStep s;
    s.m = 0;
    s.c = c0.leading;
    chain.steps.push_back(std::move(s));
    chain.complete = true;
    return chain;
  }

  auto [s0, s1] = chain_start(c0);
  chain.steps.push_back(std::move(s0));
  chain.steps.push_back(std::move(s1));

  double max_c = std::max(std::fabs(chain.steps[0].c), std::fabs(chain.steps[1].c));
  const std::size_t n = c0.size();
  for (std::size_t m = 2; m <= n; ++m) {
    const double eps = kSturmEpsCRel * max_c;
    auto next = long_division(chain.steps[m - 2], chain.steps[m - 1], eps);
    if (!next) {
      chain.complete = false;
      return chain;
    }
    double mag = std::fabs(next->c);
    for (double w : next->weights) mag = std::max(mag, std::fabs(w));
    if (mag == 0.0 || std::fabs(next->c) <= kSturmEpsCRel * std::max(mag, max_c)) {
      chain.complete = false;
      return chain;
    }
    max_c = std::max(max_c, std::fabs(next->c));
    chain.steps.push_back(std::move(*next));
  }
  chain.complete = true;
  return chain;
}

CountResult count_roots(const SturmChain& chain, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("count_roots: need a < b");
  auto variations = [&](double x) {
    int changes = 0;
    int last = 0;
    for (const SturmStep& s : chain.steps) {
      const int sg = sturm_step_sign(s, x);
      if (sg == 0) continue;
      if (last != 0 && sg != last) ++changes;
      last = sg;
    }
    return changes;
  };
  CountResult r;
  r.count = std::max(0, variations(a) - variations(b));
  r.lower_bound = !chain.complete;
  return r;
}

SecularCoefficients deflate(const SecularCoefficients& c0, const Vec& roots) {
  if (roots.empty()) return c0;
  const std::size_t ns = roots.size();
  const std::size_t n = c0.size();
  if (ns > n) throw std::invalid_argument("deflate: more roots than poles");
  const double scale = pole_scale(c0.poles);
  for (double xi : roots)
    for (double d : c0.poles)
      if (std::fabs(xi - d) < 1e-12 * scale)
        throw NumericalError("deflate", "root coincides with a pole");

  Vec xs = roots;
  std::sort(xs.begin(), xs.end());
  Vec poles(c0.poles.begin() + ns, c0.poles.end());
  Vec betas(poles.size());
  for (std::size_t j = 0; j < poles.size(); ++j) {
    double factor = 1.0;
    for (std::size_t p = 0; p < ns; ++p)
      factor *= (poles[j] - c0.poles[p]) / (poles[j] - xs[p]);
    betas[j] = factor * c0.weights[ns + j];
  }
  return make_secular(std::move(poles), std::move(betas), c0.leading);
}

namespace {

// f-scale used to judge whether a candidate value is genuinely a root.
double residual_scale(const SecularCoefficients& c, double x) {
  double mass = 0.0, dist = kInf;
  for (std::size_t j = 0; j < c.size(); ++j) {
    mass += std::fabs(c.weights[j]);
    dist = std::min(dist, std::fabs(x - c.poles[j]));
  }
  return 1.0 + mass / std::max(dist, 1e-300);
}

bool is_verified_root(const SecularCoefficients& c, double x) {
  return std::fabs(eval_secular(c, x)) <= 1e-6 * residual_scale(c, x);
}

// Range provably containing all roots: beyond the poles by the total weight
// mass the secular sum is below 1 in magnitude. Expanded until f has the
// asymptotic sign at both ends.
std::pair<double, double> clip_range(const SecularCoefficients& c) {
  double mass = 0.0;
  for (double w : c.weights) mass += std::fabs(w);
  const double scale = pole_scale(c.poles);
  const double pad = std::max(1e-6 * scale, 1e-3 * mass);
  double lo = c.poles.front() - mass - pad;
  double hi = c.poles.back() + mass + pad;
  for (int i = 0; i < 64 && eval_secular(c, hi) <= 0.0; ++i) hi += std::max(1.0, mass);
  for (int i = 0; i < 64 && eval_secular(c, lo) <= 0.0; ++i) lo -= std::max(1.0, mass);
  return {lo, hi};
}

// Weight-sign parity of the root count in interval i of c (intervals cut by
// the poles, 0 .. size): true when the count is odd. Exact for simple roots.
bool interval_parity_odd(const SecularCoefficients& c, std::size_t i) {
  const std::size_t n = c.size();
  if (i == 0) return c.weights.front() < 0.0;
  if (i == n) return c.weights.back() > 0.0;
  return c.weights[i - 1] * c.weights[i] > 0.0;
}

// Deflation used by the restart loop: each consumed root is paired with its
// nearest still-available pole, keeping the correction factors near one.
// (The textbook form dropping the smallest poles is exact algebraically but
// explodes the remaining weights when roots sit far from the dropped poles.)
SecularCoefficients deflate_paired(const SecularCoefficients& c0, Vec roots) {
  if (roots.empty()) return c0;
  const std::size_t n = c0.size();
  std::sort(roots.begin(), roots.end());
  std::vector<char> dropped(n, 0);
  std::vector<std::size_t> pair_of(roots.size());
  for (std::size_t r = 0; r < roots.size(); ++r) {
    std::size_t best = n;
    double best_gap = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (dropped[j]) continue;
      const double g = std::fabs(c0.poles[j] - roots[r]);
      if (g < best_gap) {
        best_gap = g;
        best = j;
      }
    }
    dropped[best] = 1;
    pair_of[r] = best;
  }

  Vec poles, betas;
  for (std::size_t j = 0; j < n; ++j) {
    if (dropped[j]) continue;
    double factor = 1.0;
    for (std::size_t r = 0; r < roots.size(); ++r)
      factor *= (c0.poles[j] - c0.poles[pair_of[r]]) / (c0.poles[j] - roots[r]);
    poles.push_back(c0.poles[j]);
    betas.push_back(factor * c0.weights[j]);
  }
  return make_secular(std::move(poles), std::move(betas), c0.leading);
}

}  // namespace

RootAccount count_all_roots(const SecularCoefficients& c0) {
  const std::size_t n = c0.size();
  RootAccount acc;
  acc.interval_counts.assign(n + 1, 0);
  if (n == 0) return acc;

  const double scale = pole_scale(c0.poles);
  const double nudge = 1e-12 * scale;
  SturmChain chain = build_chain(c0);

  if (chain.complete) {
    std::vector<long> counts(n + 1, 0);
    double prev_point = -kInf;
    auto var_at = [&](double x) { return count_roots(chain, x, kInf).count; };
    // V(x) rewritten via count over (x, inf): count(a,b) = V(a) - V(b).
    long v_prev = var_at(-kInf);
    long total = 0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double right = (i == n) ? kInf : c0.poles[i] + nudge;
      long v_right = 0;
      if (i < n) v_right = var_at(right);
      const long cnt = std::max<long>(0, v_prev - v_right);
      counts[i] = cnt;
      total += cnt;
      v_prev = v_right;
      prev_point = right;
    }
    (void)prev_point;
    if (total == static_cast<long>(n)) {
      acc.interval_counts = std::move(counts);
      return acc;
    }
    // fall through to the solve path on inconsistency
  }

  // Partial chain (or inconsistent counts): solve what can be certified,
  // deflate the found roots away, restart on the smaller problem. An
  // interval whose adjacent weight signs give odd parity always holds a
  // root, chain or no chain; once enough roots are deflated the chain on the
  // remainder completes and settles the rest exactly.
  SecularCoefficients working = c0;
  Vec found_all;
  const double tol = 1e-12 * scale;

  for (std::size_t restart = 0; restart <= n && found_all.size() < n; ++restart) {
    const std::size_t m = working.size();
    if (m == 0) break;
    acc.restarts = restart;
    const auto [clip_lo, clip_hi] = clip_range(working);
    const double wnudge = 1e-12 * pole_scale(working.poles);

    auto bracket_edges = [&](std::size_t i) {
      const double lo = (i == 0) ? clip_lo : working.poles[i - 1] + wnudge;
      const double hi = (i == m) ? clip_hi : working.poles[i] - wnudge;
      return std::pair<double, double>{lo, hi};
    };
    auto solve_bracket = [&](std::size_t i, long expected, Vec& sink) {
      const auto [lo, hi] = bracket_edges(i);
      if (!(lo < hi)) return;
      try {
        Vec rs = dnc_solve(working, RootBracket{lo, hi, expected}, tol);
        for (double r : rs)
          if (is_verified_root(working, r)) sink.push_back(r);
      } catch (const NumericalError&) {
        // under-resolved bracket: later restarts recover what is missing
      }
    };

    Vec found_round;
    const SturmChain wchain = (restart == 0) ? std::move(chain) : build_chain(working);
    if (wchain.complete) {
      for (std::size_t i = 0; i <= m; ++i) {
        const auto [lo, hi] = bracket_edges(i);
        if (!(lo < hi)) continue;
        const long cnt = count_roots(wchain, lo, hi).count;
        if (cnt >= 1) solve_bracket(i, cnt, found_round);
      }
    } else {
      for (std::size_t i = 0; i <= m; ++i)
        if (interval_parity_odd(working, i)) solve_bracket(i, 1, found_round);
    }

    if (found_round.empty()) {
      // Nothing parity-certified: scan for crossing pairs hiding inside
      // even-parity intervals.
      const int samples = static_cast<int>(64 * m + 9);
      double prev_x = clip_lo;
      double prev_f = eval_secular(working, prev_x);
      for (int s = 1; s <= samples; ++s) {
        const double x =
            clip_lo + (clip_hi - clip_lo) * static_cast<double>(s) / static_cast<double>(samples);
        double fx;
        try {
          fx = eval_secular(working, x);
        } catch (const std::invalid_argument&) {
          continue;
        }
        if ((prev_f < 0) != (fx < 0)) {
          try {
            Vec rs = dnc_solve(working, RootBracket{prev_x, x, 1}, tol);
            for (double r : rs)
              if (is_verified_root(working, r)) found_round.push_back(r);
          } catch (const NumericalError&) {
          }
        }
        prev_x = x;
        prev_f = fx;
      }
    }

    if (found_round.empty()) {
      // Still nothing: hunt the deepest |f| dip for a tangent pair.
      const int samples = static_cast<int>(64 * m + 9);
      double best_x = 0.0, best_f = kInf;
      for (int s = 1; s < samples; ++s) {
        const double x =
            clip_lo + (clip_hi - clip_lo) * static_cast<double>(s) / static_cast<double>(samples);
        double fx;
        try {
          fx = std::fabs(eval_secular(working, x)) / residual_scale(working, x);
        } catch (const std::invalid_argument&) {
          continue;
        }
        if (fx < best_f) {
          best_f = fx;
          best_x = x;
        }
      }
      const double h = (clip_hi - clip_lo) / static_cast<double>(samples);
      try {
        Vec rs = dnc_solve(working, RootBracket{best_x - h, best_x + h, 2}, tol);
        for (double r : rs)
          if (is_verified_root(working, r)) found_round.push_back(r);
      } catch (const NumericalError&) {
      }
    }
    if (found_round.empty()) break;

    std::sort(found_round.begin(), found_round.end());
    if (found_round.size() > working.size()) found_round.resize(working.size());
    for (double r : found_round) found_all.push_back(r);
    if (found_all.size() >= n) break;
    working = deflate_paired(working, found_round);
  }

  if (found_all.size() != n)
    throw NumericalError("sturm", "root accounting incomplete: found " +
                                       std::to_string(found_all.size()) + " of " +
                                       std::to_string(n));

  std::sort(found_all.begin(), found_all.end());
  for (double r : found_all) {
    const std::size_t idx =
        std::upper_bound(c0.poles.begin(), c0.poles.end(), r) - c0.poles.begin();
    ++acc.interval_counts[idx];
  }
  acc.roots = std::move(found_all);
  acc.solved = true;
  return acc;
}

}  // namespace eigmod
