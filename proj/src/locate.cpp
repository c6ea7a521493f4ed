#include "eigmod/locate.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "eigmod/sturm.hpp"

namespace eigmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pole_scale(const Vec& poles) {
  double s = 1.0;
  for (double p : poles) s = std::max(s, std::fabs(p));
  return s;
}

// Interval j over poles d_0..d_{N-1} is (d_{j-1}, d_j). Root-count parity
// from the weight signs alone: the secular function leaves pole j-1 with
// sign -sign(alpha_{j-1}) and approaches pole j with sign +sign(alpha_j);
// the unbounded ends take the sign of the leading 1.
bool parity_odd(const SecularCoefficients& c, std::size_t j) {
  const std::size_t n = c.size();
  if (j == 0) return c.weights.front() < 0.0;
  if (j == n) return c.weights.back() > 0.0;
  return c.weights[j - 1] * c.weights[j] > 0.0;
}

class LazyChain {
 public:
  explicit LazyChain(const SecularCoefficients& c) : c_(c) {}

  const SturmChain& get() {
    if (!chain_) chain_ = build_chain(c_);
    return *chain_;
  }

  // Sturm count over interval j; a lower bound when the chain is partial.
  CountResult interval_count(std::size_t j) {
    const SturmChain& ch = get();
    const std::size_t n = c_.size();
    const double nudge = 1e-12 * pole_scale(c_.poles);
    const double lo = (j == 0) ? -kInf : c_.poles[j - 1] + nudge;
    const double hi = (j == n) ? kInf : c_.poles[j] - nudge;
    return count_roots(ch, lo, hi);
  }

 private:
  const SecularCoefficients& c_;
  std::optional<SturmChain> chain_;
};

}  // namespace

ShiftKind classify_shift(const std::vector<int>& signs) {
  if (signs.size() != 2) throw std::invalid_argument("classify_shift: rank-2 signature required");
  if (signs[0] > 0 && signs[1] > 0) return ShiftKind::double_right;
  if (signs[0] < 0 && signs[1] < 0) return ShiftKind::double_left;
  return ShiftKind::mixed;
}

LocationVector locate_rank2(const SecularCoefficients& c0, ShiftKind kind) {
  const std::size_t n = c0.size();
  for (double w : c0.weights)
    if (w == 0.0) throw std::invalid_argument("locate_rank2: zero weight (deflate first)");
  LocationVector loc;
  loc.counts.assign(n + 1, 0);
  if (n == 0) return loc;

  LazyChain chain(c0);
  // Confirm an even-parity interval the budget did not force to zero.
  auto confirm2 = [&](std::size_t j) -> long {
    const CountResult r = chain.interval_count(j);
    // A partial chain cannot refute the scan; keep its answer of two.
    return r.lower_bound ? 2 : r.count;
  };

  long m = 0;
  switch (kind) {
    case ShiftKind::double_right: {
      loc.counts[0] = 0;
      for (std::size_t j = 1; j < n; ++j) {
        if (parity_odd(c0, j)) {
          loc.counts[j] = 1;
          m += 1;
        } else if (m + 2 > static_cast<long>(j)) {
          loc.counts[j] = 0;
        } else {
          loc.counts[j] = confirm2(j);
          m += loc.counts[j];
        }
      }
      loc.counts[n] = static_cast<long>(n) - m;
      break;
    }
    case ShiftKind::double_left: {
      loc.counts[n] = 0;
      for (std::size_t it = 1; it < n; ++it) {
        const std::size_t j = n - it;  // interval (d_{j-1}, d_j)
        if (parity_odd(c0, j)) {
          loc.counts[j] = 1;
          m += 1;
        } else if (m + 2 > static_cast<long>(it)) {
          loc.counts[j] = 0;
        } else {
          loc.counts[j] = confirm2(j);
          m += loc.counts[j];
        }
      }
      loc.counts[0] = static_cast<long>(n) - m;
      break;
    }
    case ShiftKind::mixed: {
      loc.counts[0] = parity_odd(c0, 0) ? 1 : 0;
      m = loc.counts[0];
      for (std::size_t j = 1; j < n; ++j) {
        if (parity_odd(c0, j)) {
          loc.counts[j] = 1;
          m += 1;
        } else if (m == static_cast<long>(j)) {
          // Both interlacing bounds tight: j of the first j+1 intervals are
          // already filled, so this interval must be empty.
          loc.counts[j] = 0;
        } else {
          loc.counts[j] = confirm2(j);
          m += loc.counts[j];
        }
      }
      loc.counts[n] = static_cast<long>(n) - m;
      break;
    }
  }

  bool sane = true;
  for (long c : loc.counts)
    if (c < 0 || c > 2) sane = false;
  if (sane && loc.total() == static_cast<long>(n)) return loc;

  // Scan inconsistent with the parities: recount every interval.
  LocationVector redo;
  redo.counts.assign(n + 1, 0);
  long total = 0;
  for (std::size_t j = 0; j <= n; ++j) {
    const CountResult r = chain.interval_count(j);
    if (r.lower_bound)
      throw NumericalError("locate", "rank-2 scan inconsistent and chain partial");
    redo.counts[j] = r.count;
    total += r.count;
  }
  if (total != static_cast<long>(n))
    throw NumericalError("locate", "rank-2 interval counts sum to " + std::to_string(total) +
                                       " of " + std::to_string(n));
  return redo;
}

std::pair<double, double> interlacing_bounds(std::size_t index, const Vec& lambda,
                                             std::size_t rank, const std::vector<int>& signs) {
  const std::size_t n = lambda.size();
  if (index < 1 || index > n) throw std::invalid_argument("interlacing_bounds: index out of range");
  if (signs.size() != rank || rank < 1)
    throw std::invalid_argument("interlacing_bounds: bad signature");
  std::size_t plus = 0, minus = 0;
  for (int s : signs) (s > 0 ? plus : minus)++;

  const double lo = (index > minus) ? lambda[index - minus - 1] : -kInf;
  const double hi = (index + plus <= n) ? lambda[index + plus - 1] : kInf;
  return {lo, hi};
}

LocateResult locate_rank_k(const SecularCoefficients& c0, const std::vector<int>& signs) {
  const std::size_t n = c0.size();
  LocateResult out;
  out.loc.counts.assign(n + 1, 0);
  if (n == 0) return out;
  if (signs.empty()) throw std::invalid_argument("locate_rank_k: empty signature");

  long plus = 0, minus = 0;
  for (int s : signs) (s > 0 ? plus : minus)++;
  const long k = plus + minus;

  LazyChain chain(c0);
  const double scale = pole_scale(c0.poles);
  double mass = 0.0;
  for (double w : c0.weights) mass += std::fabs(w);

  long m = 0;
  bool escalate = false;
  for (std::size_t j = 0; j <= n && !escalate; ++j) {
    // After interval j the running total lies in [j+1-plus, j+minus]
    // (clamped); parity comes from the weight signs.
    const long lo_after = std::max<long>(0, static_cast<long>(j) + 1 - plus);
    const long hi_after =
        std::min<long>(static_cast<long>(n), static_cast<long>(j) + minus);
    const int parity = parity_odd(c0, j) ? 1 : 0;

    std::vector<long> cands;
    for (long c = 0; c <= k; ++c) {
      if (c % 2 != parity) continue;
      const long after = m + c;
      if (after < lo_after || after > hi_after) continue;
      if (j == n && after != static_cast<long>(n)) continue;
      cands.push_back(c);
    }
    long cnt = -1;
    if (cands.size() == 1) {
      cnt = cands.front();
    } else if (cands.empty()) {
      escalate = true;
      break;
    } else {
      // Cheap rung first: sampled sign crossings are a certified lower
      // bound and usually separate the candidates.
      const double nudge = 1e-12 * scale;
      const double lo = (j == 0) ? c0.poles.front() - mass - 1.0 : c0.poles[j - 1] + nudge;
      const double hi = (j == n) ? c0.poles.back() + mass + 1.0 : c0.poles[j] - nudge;
      if (lo < hi) {
        const long crossings = crossing_count(c0, lo, hi, 65);
        std::vector<long> left;
        for (long c : cands)
          if (c >= crossings) left.push_back(c);
        if (left.size() == 1) cnt = left.front();
        if (left.empty()) {
          escalate = true;
          break;
        }
      }
      if (cnt < 0) {
        const CountResult counted = chain.interval_count(j);
        if (!counted.lower_bound) {
          cnt = counted.count;
        } else {
          escalate = true;
          break;
        }
      }
    }
    out.loc.counts[j] = cnt;
    m += cnt;
  }

  if (!escalate && m == static_cast<long>(n)) return out;

  // Budget and chain could not settle everything: solve outright.
  RootAccount acc = count_all_roots(c0);
  out.loc.counts = acc.interval_counts;
  out.roots = std::move(acc.roots);
  out.solved = acc.solved;
  return out;
}

}  // namespace eigmod
