#include "spiked/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spiked {

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "rademacher") return NoiseKind::rademacher;
  throw std::invalid_argument("unknown noise kind: " + std::string(name));
}

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::gaussian ? "gaussian" : "rademacher";
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
  return base ^ mix64(mix64(a) + 0x632be59bd9b4e019ULL * (b + 1));
}

void fill_noise(Rng& rng, NoiseKind kind, double variance, std::span<double> out) {
  const double sd = std::sqrt(variance);
  if (kind == NoiseKind::gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : out) x = sd * normal(rng);
  } else {
    // one 64-bit draw supplies 64 signs
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t bits = rng();
      for (int b = 0; b < 64 && i < out.size(); ++b, ++i) {
        out[i] = ((bits >> b) & 1U) ? sd : -sd;
      }
    }
  }
}

Vector standard_normal_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  fill_noise(rng, NoiseKind::gaussian, 1.0, v);
  return v;
}

Vector random_unit_vector(Rng& rng, std::size_t n) {
  Vector v = standard_normal_vector(rng, n);
  normalize(v);
  return v;
}

Vector basis_vector(std::size_t n, std::size_t index) {
  if (index >= n) throw std::out_of_range("basis index out of range");
  Vector e(n, 0.0);
  e[index] = 1.0;
  return e;
}

}  // namespace spiked
