#pragma once

#include <cmath>
#include <sstream>

#include "tsbet/errors.hpp"

namespace tsbet {

struct RootResult {
  double root;
  double residual;
  int iterations;
};

// Root of f on [lo, hi] where f(lo) and f(hi) have opposite signs. Secant steps
// are taken when they land strictly inside the current bracket and shrink it by
// at least half compared to the previous step; otherwise the step bisects.
// Stops once the bracket is narrower than xtol (absolute) or rtol * |x|.
template <class F>
RootResult bracketed_root(F&& f, double lo, double hi, double xtol, double rtol = 4e-16,
                          int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, 0.0, 0};
  if (fhi == 0.0) return {hi, 0.0, 0};
  if (std::signbit(flo) == std::signbit(fhi) || std::isnan(flo) || std::isnan(fhi)) {
    std::ostringstream msg;
    msg << "bracketed_root: no sign change on [" << lo << ", " << hi << "], f(lo)=" << flo
        << ", f(hi)=" << fhi;
    throw SolverError(msg.str());
  }
  double previous_width = hi - lo;
  for (int it = 1; it <= max_iter; ++it) {
    const double width = hi - lo;
    const double mid = lo + 0.5 * width;
    if (width <= xtol || width <= rtol * std::abs(mid) || mid <= lo || mid >= hi) {
      const double fm = f(mid);
      return {mid, fm, it};
    }
    double x = lo - flo * (hi - lo) / (fhi - flo);
    const bool secant_ok = std::isfinite(x) && x > lo && x < hi && width <= 0.5 * previous_width;
    if (!secant_ok) x = mid;
    previous_width = width;
    const double fx = f(x);
    if (fx == 0.0) return {x, 0.0, it};
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
  }
  throw ConvergenceError("bracketed_root: iteration limit reached", std::min(std::abs(flo), std::abs(fhi)),
                         max_iter);
}

}  // namespace tsbet
