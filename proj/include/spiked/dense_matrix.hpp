#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spiked {

using Vector = std::vector<double>;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

/// Row-major dense matrix of doubles.
///
/// Construction from an entry buffer validates the length and rejects
/// non-finite values. Element access is unchecked.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return entries_.size(); }

  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return entries_[i * cols_ + j]; }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> entries() noexcept { return entries_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(entries_).subspan(i * cols_, cols_);
  }

  ConstMatrixMap view() const {
    return ConstMatrixMap(entries_.data(), static_cast<Eigen::Index>(rows_),
                          static_cast<Eigen::Index>(cols_));
  }
  MatrixMap view() {
    return MatrixMap(entries_.data(), static_cast<Eigen::Index>(rows_),
                     static_cast<Eigen::Index>(cols_));
  }

  DenseMatrix transposed() const;
  bool all_finite() const noexcept;

  /// y = M x
  Vector multiply(std::span<const double> x) const;
  /// x = Mᵀ y
  Vector multiply_transpose(std::span<const double> y) const;

  /// Adds scale · a bᵀ in place.
  void add_outer(double scale, std::span<const double> a, std::span<const double> b);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& m);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// Scales `a` to unit Euclidean norm; throws if the norm is zero or non-finite.
void normalize(std::span<double> a);

}  // namespace spiked
