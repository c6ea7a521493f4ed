#pragma once

#include <optional>

#include "eigmod/secular.hpp"
#include "eigmod/types.hpp"

namespace eigmod {

/// One link of the secular Sturm chain:
///   p_m(x) = [c - sum_j weights[j]/(x - poles[j])] * prod_j (x - poles[j]).
/// Steps may carry a positive rescale (`scale`), which leaves every sign --
/// and hence the chain -- unchanged; `a_div`/`b_div` record the division that
/// produced the step so the three-term identity can be checked:
///   step_m(x) / scale == -step_{m-2}(x) + a_div * (x - b_div) * step_{m-1}(x).
struct SturmStep {
  int m = 0;
  double c = 0.0;
  Vec weights;
  Vec poles;
  double a_div = 0.0;
  double b_div = 0.0;
  double scale = 1.0;
};

struct SturmChain {
  std::vector<SturmStep> steps;
  bool complete = false;
  std::size_t n_poles = 0;  // pole count of step 0
};

/// Relative threshold below which a leading constant counts as zero and the
/// chain terminates (partial chain).
inline constexpr double kSturmEpsCRel = 1e-10;

/// p_m evaluated as a value (secular part times pole product). Intended for
/// moderate pole counts; root counting uses signs only.
double eval_sturm_step(const SturmStep& s, double x);

/// Sign of p_m at x, with +/-infinity handled via the leading constant and
/// pole-count parity. Returns -1, 0 or +1.
int sturm_step_sign(const SturmStep& s, double x);

/// Steps 0 and 1: p_0 verbatim from the coefficients (leading must be 1),
/// p_1 its derivative re-expressed in secular form with the largest pole
/// dropped.
std::pair<SturmStep, SturmStep> chain_start(const SecularCoefficients& c0);

/// One secular long-division step; nullopt when |prev1.c| <= eps_c (chain
/// termination).
std::optional<SturmStep> long_division(const SturmStep& prev2, const SturmStep& prev1,
                                       double eps_c);

SturmChain build_chain(const SecularCoefficients& c0);

struct CountResult {
  long count = 0;
  bool lower_bound = false;  // set when the chain is partial
};

/// Sign-variation count V(a) - V(b) over (a, b]; infinities allowed.
CountResult count_roots(const SturmChain& chain, double a, double b);

/// Removes already-found roots: drops the first roots.size() poles and
/// rescales the remaining weights (the deflated function keeps exactly the
/// not-yet-found roots).
SecularCoefficients deflate(const SecularCoefficients& c0, const Vec& roots);

/// Per-interval account of all roots of the secular function. When the chain
/// is complete the counts come from sign variation alone; otherwise found
/// roots are solved from certified brackets, deflated away, and the chain is
/// restarted until all roots are accounted for.
struct RootAccount {
  std::vector<long> interval_counts;  // size c0.size()+1, intervals cut by c0.poles
  Vec roots;                          // explicitly solved roots (restart path only)
  bool solved = false;                // true when `roots` carries the answer
  std::size_t restarts = 0;
};

RootAccount count_all_roots(const SecularCoefficients& c0);

}  // namespace eigmod
