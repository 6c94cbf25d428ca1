#include "spiked/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spiked {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  // Seed with a few panels so narrow features are not skipped by the first estimate.
  constexpr int kPanels = 8;
  const double h = (b - a) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + p * h;
    const double hi = p + 1 == kPanels ? b : a + (p + 1) * h;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(mid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, tol / kPanels, max_depth);
  }
  return total;
}

double integrate_edge_singular(const std::function<double(double)>& f, double a, double b,
                               double tol) {
  if (!(b > a)) return 0.0;
  const double mid = 0.5 * (a + b);
  const double span = std::sqrt(mid - a);
  // x = a + t², dx = 2t dt on [a, mid]; x = b - t² on [mid, b]. The
  // transformed integrand has a finite limit at t = 0 even for an inverse
  // square-root edge; take it at a small offset that stays representable.
  auto offset = [&](double edge) {
    const double ulp = std::abs(std::nextafter(edge, b + a - edge) - edge);
    return std::max(1e-7 * span, std::sqrt(64.0 * ulp));
  };
  const double da = offset(a);
  const double db = offset(b);
  auto lower = [&](double t) {
    t = std::max(t, da);
    return 2.0 * t * f(a + t * t);
  };
  auto upper = [&](double t) {
    t = std::max(t, db);
    return 2.0 * t * f(b - t * t);
  };
  const double left = adaptive_simpson(lower, 0.0, span, 0.5 * tol);
  const double right = adaptive_simpson(upper, 0.0, std::sqrt(b - mid), 0.5 * tol);
  return left + right;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              double f_tol, int max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw std::invalid_argument("bisect: root not bracketed");
  for (int it = 0; it < max_iter && hi - lo > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (std::abs(fm) <= f_tol) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace spiked
