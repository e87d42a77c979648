#pragma once

#include <cmath>

namespace oracle {

template <class F>
long double simpson_step(F& f, long double a, long double b, long double fa, long double fm,
                         long double fb, long double whole, long double eps, int depth) {
  const long double m = (a + b) / 2;
  const long double lm = (a + m) / 2;
  const long double rm = (m + b) / 2;
  const long double flm = f(lm);
  const long double frm = f(rm);
  const long double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const long double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const long double diff = left + right - whole;
  if (depth <= 0 || std::fabs(diff) <= 15 * eps) return left + right + diff / 15;
  return simpson_step(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

/// Adaptive Simpson quadrature in extended precision.
template <class F>
long double integrate(F f, long double a, long double b, long double eps = 1e-17L,
                      int depth = 60) {
  const long double fa = f(a);
  const long double fb = f(b);
  const long double fm = f((a + b) / 2);
  const long double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, eps, depth);
}

/// ∫_0^1∫_0^1 (k + t − s)^{-2} ds dt. The difference t − s has the triangle
/// density 1 − |x| on [−1, 1]; each half is integrated separately because of
/// the kink at 0.
inline double cell_coupling(long k) {
  const long double kk = static_cast<long double>(k);
  auto f = [kk](long double x) { return (1 - std::fabs(x)) / ((kk + x) * (kk + x)); };
  return static_cast<double>(integrate(f, -1.0L, 0.0L) + integrate(f, 0.0L, 1.0L));
}

}  // namespace oracle
