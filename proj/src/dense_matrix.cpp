#include "spiked/dense_matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spiked {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                                " entries, got " + std::to_string(entries_.size()));
  }
  if (!all_finite()) throw std::invalid_argument("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  t.view() = view().transpose();
  return t;
}

bool DenseMatrix::all_finite() const noexcept {
  for (double x : entries_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Vector DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("multiply: dimension mismatch");
  Vector y(rows_);
  VectorMap(y.data(), static_cast<Eigen::Index>(rows_)).noalias() =
      view() * ConstVectorMap(x.data(), static_cast<Eigen::Index>(cols_));
  return y;
}

Vector DenseMatrix::multiply_transpose(std::span<const double> y) const {
  if (y.size() != rows_) throw std::invalid_argument("multiply_transpose: dimension mismatch");
  Vector x(cols_);
  VectorMap(x.data(), static_cast<Eigen::Index>(cols_)).noalias() =
      view().transpose() * ConstVectorMap(y.data(), static_cast<Eigen::Index>(rows_));
  return x;
}

void DenseMatrix::add_outer(double scale, std::span<const double> a, std::span<const double> b) {
  if (a.size() != rows_ || b.size() != cols_) {
    throw std::invalid_argument("add_outer: dimension mismatch");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    const double ai = scale * a[i];
    double* r = entries_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) r[j] += ai * b[j];
  }
}

DenseMatrix from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  out.view() = m;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return ConstVectorMap(a.data(), static_cast<Eigen::Index>(a.size()))
      .dot(ConstVectorMap(b.data(), static_cast<Eigen::Index>(b.size())));
}

double norm2(std::span<const double> a) {
  return ConstVectorMap(a.data(), static_cast<Eigen::Index>(a.size())).norm();
}

void normalize(std::span<double> a) {
  const double nrm = norm2(a);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) {
    throw std::invalid_argument("normalize: zero or non-finite vector");
  }
  for (double& x : a) x /= nrm;
}

}  // namespace spiked
