#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "spiked/dense_matrix.hpp"

namespace spiked {

/// Leading-order behaviour of the top singular triple of β v uᵀ + Z with
/// β = λ√φ.
struct BbpPrediction {
  double lambda = 0.0;
  double phi = 1.0;
  bool above_threshold = false;
  double outlier = 0.0;        // predicted ŝ₁
  double left_overlap = 0.0;   // |⟨v̂₁, v⟩|
  double right_overlap = 0.0;  // |⟨û₁, u⟩|
};

/// β at which the outlier separates: √φ.
double critical_snr(double phi);

BbpPrediction predict(double lambda, double phi);

/// Aspect parameter of the n^q x n^(k−q) unfolding of an order-k tensor: n^((k−2q)/2).
double unfolding_phi(std::size_t n, std::size_t k, std::size_t q = 1);

/// β_c = n^((k−2)/4), the detection threshold shared by all unfoldings.
double tensor_critical_beta(std::size_t n, std::size_t k);

struct BetaEstimate {
  double value = 0.0;
  /// ŝ₁ did not clear the bulk edge φ + 1; `value` is the clamped estimate.
  bool below_threshold = false;
};

/// Inverts the outlier-location formula: the β whose predicted ŝ₁ equals
/// `s1_hat`. Below the edge the discriminant is clamped to zero.
BetaEstimate beta_hat(double s1_hat, double phi);

struct ResolventTriple {
  double a = 0.0;  // ⟨v, (x − ZZᵀ/x)⁻¹ v⟩
  double b = 0.0;  // ⟨v, (x − ZZᵀ/x)⁻¹ (Z/x) u⟩
  double c = 0.0;  // ⟨u, (x − ZᵀZ/x)⁻¹ u⟩
  double x = 0.0;
};

/// Resolvent quadratic forms for one sample (Z, v, u). All solves happen on
/// the n-side: C uses C(x) = (⟨u,u⟩ + ⟨Zu, (x² − ZZᵀ)⁻¹ Zu⟩)/x.
class ResolventEvaluator {
 public:
  /// Copies what it needs; the arguments may be discarded afterwards.
  ResolventEvaluator(const DenseMatrix& z, std::span<const double> v, std::span<const double> u);

  /// s₁(Z).
  double top_noise_singular_value() const noexcept { return s1_; }
  std::size_t rows() const noexcept { return gram_.rows(); }
  std::size_t cols() const noexcept { return cols_; }

  /// Throws ShiftInsideSpectrumError unless x > s₁(Z).
  ResolventTriple at(double x) const;

  /// (1/β − B(x))² − A(x) C(x); its zeros above s₁ are singular values of β v uᵀ + Z.
  double master_function(double x, double beta) const;

 private:
  DenseMatrix gram_;
  Vector v_;
  Vector zu_;
  double uu_ = 0.0;
  double s1_ = 0.0;
  std::size_t cols_ = 0;
};

ResolventTriple empirical_resolvent(const DenseMatrix& z, std::span<const double> v,
                                    std::span<const double> u, double x);

struct MasterRootOptions {
  /// A root counts as an outlier only beyond s₁ + edge_window.
  /// Negative selects the edge fluctuation scale n^(−2/3).
  double edge_window = -1.0;
  /// Upper bracket end; non-positive selects max(2β, 2(φ + 1)).
  double x_max = -1.0;
  int max_doublings = 8;
  int grid_points = 64;
  double x_tol = 1e-13;
};

/// Outlier singular value of β v uᵀ + Z located by root-finding on the master
/// equation. Scans a log-spaced grid in x − s₁ for the rightmost sign change
/// and bisects it. Returns nullopt when f > 0 on the whole bracket.
std::optional<double> master_equation_root(const DenseMatrix& z, std::span<const double> v,
                                           std::span<const double> u, double beta,
                                           const MasterRootOptions& options = {});

std::optional<double> master_equation_root(const ResolventEvaluator& evaluator, double beta,
                                           const MasterRootOptions& options = {});

}  // namespace spiked
