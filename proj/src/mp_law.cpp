#include "spiked/mp_law.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spiked/errors.hpp"
#include "spiked/quadrature.hpp"

namespace spiked {

namespace {

constexpr double kQuadTol = 1e-14;

// ∫ of f between `edge` and `x`, substituting x = edge ± t² so that a square-root
// singularity at `edge` is removed.
template <class F>
double integrate_from_edge(F&& f, double edge, double x) {
  const double sign = x >= edge ? 1.0 : -1.0;
  const double span = std::sqrt(std::abs(x - edge));
  auto g = [&](double t) { return t == 0.0 ? 0.0 : 2.0 * t * f(edge + sign * t * t); };
  return adaptive_simpson(g, 0.0, span, kQuadTol);
}

}  // namespace

MpLaw::MpLaw(double phi) : phi_(phi) {
  if (!(phi >= 1.0) || !std::isfinite(phi)) {
    throw std::invalid_argument("MpLaw: phi must be finite and >= 1");
  }
  const double r = std::sqrt(phi);
  eigen_lo_ = (r - 1.0 / r) * (r - 1.0 / r);
  eigen_hi_ = (r + 1.0 / r) * (r + 1.0 / r);
}

double mp_density(const MpLaw& law, double x) {
  const auto [lo, hi] = law.eigen_edges();
  if (!(x > lo && x < hi)) return 0.0;
  return std::sqrt((x - lo) * (hi - x)) / (2.0 * std::numbers::pi * x / law.phi());
}

double singular_density(const MpLaw& law, double x) {
  const auto [lo, hi] = law.singular_edges();
  if (!(x > lo && x < hi) || x <= 0.0) return 0.0;
  const double x2 = x * x;
  return std::sqrt((x2 - lo * lo) * (hi * hi - x2)) / (std::numbers::pi * x);
}

double mp_tail_mass(const MpLaw& law, double x) {
  const auto [lo, hi] = law.eigen_edges();
  if (x >= hi) return 0.0;
  if (x <= lo) return 1.0;
  auto f = [&](double y) { return mp_density(law, y); };
  if (x >= 0.5 * (lo + hi)) return integrate_from_edge(f, hi, x);
  return 1.0 - integrate_from_edge(f, lo, x);
}

double mp_total_mass(const MpLaw& law) {
  const auto [lo, hi] = law.eigen_edges();
  return integrate_edge_singular([&](double y) { return mp_density(law, y); }, lo, hi, kQuadTol);
}

double singular_total_mass(const MpLaw& law) {
  const auto [lo, hi] = law.singular_edges();
  return integrate_edge_singular([&](double y) { return singular_density(law, y); }, lo, hi,
                                 kQuadTol);
}

double mp_quantile(const MpLaw& law, std::size_t i, std::size_t n) {
  if (n == 0 || i < 1 || i > n) throw std::invalid_argument("mp_quantile: need 1 <= i <= n");
  const double target = (static_cast<double>(i) - 0.5) / static_cast<double>(n);
  const auto [lo, hi] = law.eigen_edges();
  auto residual = [&](double x) { return mp_tail_mass(law, x) - target; };
  return bisect(residual, lo, hi, 1e-15 * hi, 1e-13);
}

std::complex<double> stieltjes(const MpLaw& law, std::complex<double> z) {
  using C = std::complex<double>;
  const double phi = law.phi();
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::invalid_argument("stieltjes: non-finite argument");
  }
  if (z.imag() == 0.0) {
    const double e = std::abs(z.real());
    if (e > phi - 1.0 && e < phi + 1.0) throw OnSupportError();
    if (e == 0.0) {
      if (phi == 1.0) throw OnSupportError();
      return {0.0, 0.0};
    }
  }
  // z m² + (φ² − 1 − z²) m + z = 0; roots multiply to 1.
  const C b = phi * phi - 1.0 - z * z;
  // b² − 4z² factored over the edges ±(φ ± 1) so it stays accurate near them.
  C root = std::sqrt((phi - 1.0 - z) * (phi + 1.0 + z) * (phi + 1.0 - z) * (phi - 1.0 + z));
  if ((std::conj(b) * root).real() < 0.0) root = -root;
  const C q = -0.5 * (b + root);
  if (q == C(0.0, 0.0)) return {0.0, 0.0};
  const C large = q / z;
  const C small = z / q;
  return std::abs(small) <= std::abs(large) ? small : large;
}

Vector predicted_singular_locations(const MpLaw& law, std::size_t n) {
  if (n == 0) throw std::invalid_argument("predicted_singular_locations: n must be >= 1");
  Vector s(n);
  for (std::size_t i = 1; i <= n; ++i) s[i - 1] = std::sqrt(law.phi() * mp_quantile(law, i, n));
  return s;
}

}  // namespace spiked
