#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "spiked/dense_matrix.hpp"

namespace spiked {

using Rng = std::mt19937_64;

enum class NoiseKind { gaussian, rademacher };

NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind kind);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Independent stream seed for (base, a, b); order-sensitive in a and b.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Fills `out` with i.i.d. noise of mean zero and variance `variance`.
void fill_noise(Rng& rng, NoiseKind kind, double variance, std::span<double> out);

Vector standard_normal_vector(Rng& rng, std::size_t n);

/// Uniform point on the unit sphere in R^n.
Vector random_unit_vector(Rng& rng, std::size_t n);

/// Standard basis vector e_index.
Vector basis_vector(std::size_t n, std::size_t index);

}  // namespace spiked
