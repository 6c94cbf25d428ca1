#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spiked/dense_matrix.hpp"
#include "spiked/linalg.hpp"
#include "spiked/random.hpp"

namespace spiked {

inline constexpr std::size_t kDefaultMemoryCap = 200'000'000;

/// Entry cap from SPIKED_UNFOLD_MEM_CAP, or kDefaultMemoryCap when unset.
/// Throws std::invalid_argument for a malformed value.
std::size_t memory_cap_from_env();

/// n^k, throwing MemoryCapError when it exceeds `cap` (or overflows).
std::size_t checked_tensor_size(std::size_t order, std::size_t dim, std::size_t cap);

/// Order-k tensor in (R^n)^{⊗k}, stored with axis 0 varying fastest.
/// Axes are 0-based throughout the C++ API.
class DenseTensor {
 public:
  DenseTensor(std::size_t order, std::size_t dim, std::size_t memory_cap = kDefaultMemoryCap);
  DenseTensor(std::size_t order, std::size_t dim, std::vector<double> entries);

  std::size_t order() const noexcept { return order_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> entries() noexcept { return entries_; }

  std::size_t linear_index(std::span<const std::size_t> index) const;
  double at(std::span<const std::size_t> index) const { return entries_[linear_index(index)]; }

 private:
  std::size_t order_;
  std::size_t dim_;
  std::vector<double> entries_;
};

struct SpikedTensorModel {
  std::size_t order = 3;
  std::size_t dim = 2;
  double beta = 0.0;
  std::vector<Vector> signals;  // `order` unit vectors of length `dim`
  std::uint64_t noise_seed = 0;
  NoiseKind noise_kind = NoiseKind::gaussian;

  void validate() const;
};

struct TensorSampleOptions {
  /// Multiplies the noise; 0 gives the pure signal tensor.
  double noise_scale = 1.0;
  std::size_t memory_cap = kDefaultMemoryCap;
};

/// β v₁⊗…⊗v_k + W with W i.i.d. of mean 0 and variance noise_scale²/n.
DenseTensor sample_spiked_tensor(const SpikedTensorModel& model, const TensorSampleOptions& options = {});

/// vec of the Kronecker product, first vector varying fastest:
/// out[i₀ + n₀ i₁ + n₀n₁ i₂ + …] = Π v_j[i_j].
Vector vec_kron(std::span<const Vector> vectors);

/// n^q x n^(k−q) matricization along `axes` (strictly increasing, 1 <= q <= k−1).
/// Row index Σ_j i_{axes[j]} n^j, column index the same over the complement.
DenseMatrix unfold(const DenseTensor& x, std::span<const std::size_t> axes);

/// unfold(x, axes) / n^((q−1)/2); the noise part then has entry variance n^(−q).
DenseMatrix normalized_unfold(const DenseTensor& x, std::span<const std::size_t> axes);

/// Axes not in `axes`, increasing.
std::vector<std::size_t> complement_axes(std::size_t order, std::span<const std::size_t> axes);

/// Matrix-free n x n^(k−1) mode-`axis` unfolding reading the tensor in place.
/// The tensor must outlive the operator.
MatrixFreeOperator axis_operator(const DenseTensor& x, std::size_t axis);

struct AxisEstimate {
  std::size_t axis = 0;
  double s1_hat = 0.0;
  double beta_hat = 0.0;
  bool below_threshold = true;
  Vector v_hat;  // unit, length n
  Vector u_hat;  // unit, length n^(k−1)
  std::size_t iterations = 0;
  bool converged = true;
  std::string error;  // power-iteration message when !converged
};

/// Per-axis truncated HOSVD: the top singular pair of each mode unfolding and
/// the β estimate obtained by inverting the outlier formula at φ = √(n^(k−1)/n).
/// A non-converged axis is reported from its last iterate with converged = false.
std::vector<AxisEstimate> algorithm1(const DenseTensor& x, const PowerIterationOptions& power = {});

}  // namespace spiked
