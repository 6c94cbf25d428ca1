#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "spiked/dense_matrix.hpp"
#include "spiked/errors.hpp"

namespace spiked {

/// A linear map R^cols -> R^rows known only through its action.
///
/// `apply` writes M x into `out` (length rows); `apply_transpose` writes Mᵀ y
/// into `out` (length cols). `gram`, when set, materializes the rows x rows
/// matrix M Mᵀ; the power iteration uses it when the row side is small.
struct MatrixFreeOperator {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::function<void(std::span<const double> x, std::span<double> out)> apply;
  std::function<void(std::span<const double> y, std::span<double> out)> apply_transpose;
  std::function<DenseMatrix()> gram;
};

/// Wraps a dense matrix. The matrix must outlive the operator.
MatrixFreeOperator dense_operator(const DenseMatrix& m);

struct SingularTriple {
  double value = 0.0;
  Vector left;   // length rows
  Vector right;  // length cols
  /// ‖M right − value · left‖₂ at the returned iterate.
  double residual = 0.0;
  std::size_t iterations = 0;
};

struct SpectralSummary {
  SingularTriple top;
  std::optional<double> second_value;
  std::optional<Vector> full_spectrum;  // descending
};

struct PowerIterationOptions {
  std::uint64_t seed = 0;
  double tol = 1e-10;
  std::size_t max_iter = 20000;
  /// Iterate on an explicit rows x rows Gram matrix when the operator can
  /// provide one and rows <= gram_row_limit.
  bool allow_gram = true;
  std::size_t gram_row_limit = 2000;
};

/// Top singular triple by power iteration on M Mᵀ.
///
/// Each step maps x to M(Mᵀx) (or G x with an explicit Gram G) and stops once
/// the relative change of the Rayleigh estimate √⟨x, MMᵀx⟩ drops below `tol`.
/// The left vector's largest-magnitude component is made positive and the
/// right vector is Mᵀv/‖Mᵀv‖. Throws NonConvergenceError after `max_iter`
/// steps or when the operator annihilates the iterate.
SingularTriple top_singular_triple(const MatrixFreeOperator& op,
                                   const PowerIterationOptions& options = {});

/// Second singular value by one deflation step of the explicit Gram matrix.
double second_singular_value(const DenseMatrix& gram_matrix, const SingularTriple& top,
                             const PowerIterationOptions& options = {});

/// Largest dimension accepted by the dense spectrum routines.
inline constexpr std::size_t kDenseSolverLimit = 5000;

/// Singular values of M (rows <= cols) in descending order, computed as the
/// square roots of the eigenvalues of M Mᵀ.
Vector full_singular_values(const DenseMatrix& m);

/// Eigenvalues of a symmetric matrix in descending order (no vectors).
Vector symmetric_eigenvalues(const DenseMatrix& symmetric);

/// M Mᵀ, symmetrized.
DenseMatrix gram(const DenseMatrix& m);

/// Cholesky factor of x·I − G/x for a Gram matrix G = M Mᵀ.
class ShiftedGramFactor {
 public:
  /// Throws ShiftInsideSpectrumError when x·I − G/x is not positive definite.
  ShiftedGramFactor(const DenseMatrix& gram_matrix, double shift);

  double shift() const noexcept { return shift_; }
  Vector solve(std::span<const double> b) const;

 private:
  double shift_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Solves (x − M Mᵀ/x) w = b.
Vector shifted_gram_solve(const DenseMatrix& m, double x, std::span<const double> b);

SpectralSummary summarize_spectrum(const DenseMatrix& m, bool with_second, bool with_full,
                                   const PowerIterationOptions& options = {});

}  // namespace spiked
