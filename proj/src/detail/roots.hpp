#pragma once

#include <cmath>

namespace tokalloc::detail {

struct Bracket {
  double lo;
  double hi;
};

// Bisection for a predicate that is false on [.., x*) and true on [x*, ..].
// Shrinks [lo, hi] (pred(lo) false, pred(hi) true) until the relative width
// drops to rel_tol or max_iter is reached.
template <class Pred>
Bracket bisect_threshold(Pred&& pred, double lo, double hi, double rel_tol, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    if (hi - lo <= rel_tol * std::abs(hi)) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return {lo, hi};
}

// Safeguarded Newton for an increasing function h on [lo, hi] with
// h(lo) <= target <= h(hi). Falls back to bisection whenever the Newton
// step leaves the current bracket.
template <class F, class DF>
double newton_increasing(F&& h, DF&& dh, double target, double lo, double hi, double x0,
                         double rel_tol = 1e-14, int max_iter = 100) {
  double x = x0;
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double r = h(x) - target;
    if (r == 0.0) return x;
    if (r > 0.0)
      hi = x;
    else
      lo = x;
    const double slope = dh(x);
    double next = (slope > 0.0 && std::isfinite(slope)) ? x - r / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= rel_tol * std::abs(next) || hi - lo <= rel_tol * std::abs(hi))
      return next;
    x = next;
  }
  return x;
}

}  // namespace tokalloc::detail
