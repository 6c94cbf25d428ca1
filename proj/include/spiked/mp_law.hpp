#pragma once

#include <complex>
#include <cstddef>
#include <utility>

#include "spiked/dense_matrix.hpp"

namespace spiked {

/// Marchenko–Pastur family indexed by the aspect parameter φ = √(m/n) ≥ 1.
///
/// Eigenvalues of Z Zᵀ/φ follow `mp_density`, supported on
/// [(√φ − 1/√φ)², (√φ + 1/√φ)²]; singular values of Z follow
/// `singular_density`, supported on [φ − 1, φ + 1].
class MpLaw {
 public:
  explicit MpLaw(double phi);

  double phi() const noexcept { return phi_; }
  std::pair<double, double> eigen_edges() const noexcept { return {eigen_lo_, eigen_hi_}; }
  std::pair<double, double> singular_edges() const noexcept { return {phi_ - 1.0, phi_ + 1.0}; }

 private:
  double phi_;
  double eigen_lo_;
  double eigen_hi_;
};

/// Eigenvalue density of Z Zᵀ/φ; zero outside the open support.
double mp_density(const MpLaw& law, double x);

/// Singular-value density ρ_φ, evaluated from its closed form
/// √((x² − (φ−1)²)((φ+1)² − x²)) / (π x).
double singular_density(const MpLaw& law, double x);

/// ∫_x^∞ mp_density.
double mp_tail_mass(const MpLaw& law, double x);

/// ∫ over the whole support of mp_density (1 up to quadrature error).
double mp_total_mass(const MpLaw& law);
/// ∫ over the whole support of singular_density.
double singular_total_mass(const MpLaw& law);

/// ν_i with tail mass (i − 1/2)/n, for 1 <= i <= n.
double mp_quantile(const MpLaw& law, std::size_t i, std::size_t n);

/// Stieltjes transform m_φ(z) = ∫ ρ_sym(x)/(z − x) dx of the symmetrized
/// singular-value law. Solves m² + ((φ² − 1)/z − z) m + 1 = 0 and keeps the
/// root with |m| <= 1, so Im m < 0 when Im z > 0. Throws OnSupportError for
/// real z strictly inside ±[φ − 1, φ + 1].
std::complex<double> stieltjes(const MpLaw& law, std::complex<double> z);

/// √(φ ν_i) for i = 1..n, descending.
Vector predicted_singular_locations(const MpLaw& law, std::size_t n);

}  // namespace spiked
