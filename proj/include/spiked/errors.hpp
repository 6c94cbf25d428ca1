#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spiked {

/// Power iteration hit its iteration cap (or met a zero operator).
/// Carries the last iterate so callers can still inspect it.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> last_left, double last_value,
                      double relative_change, std::size_t iterations)
      : std::runtime_error(what),
        last_left_(std::move(last_left)),
        last_value_(last_value),
        relative_change_(relative_change),
        iterations_(iterations) {}

  const std::vector<double>& last_left() const noexcept { return last_left_; }
  double last_value() const noexcept { return last_value_; }
  double relative_change() const noexcept { return relative_change_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_left_;
  double last_value_;
  double relative_change_;
  std::size_t iterations_;
};

/// Cholesky factorization of x - MMᵀ/x failed: the shift is not above s₁(M).
class ShiftInsideSpectrumError : public std::runtime_error {
 public:
  ShiftInsideSpectrumError() : std::runtime_error("shift inside spectrum") {}
};

/// Master-equation bracket could not be closed after the allowed doublings.
class BracketExhaustedError : public std::runtime_error {
 public:
  explicit BracketExhaustedError(double x_max)
      : std::runtime_error("bracket exhausted (x_max = " + std::to_string(x_max) + ")"),
        x_max_(x_max) {}
  double x_max() const noexcept { return x_max_; }

 private:
  double x_max_;
};

/// Real evaluation point lies strictly inside the singular-value support.
class OnSupportError : public std::domain_error {
 public:
  OnSupportError() : std::domain_error("on support") {}
};

/// Requested tensor would exceed the configured entry cap.
class MemoryCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace spiked
