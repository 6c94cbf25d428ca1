#pragma once

#include <functional>

namespace spiked {

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

/// ∫_a^b f for f with inverse-square-root (or square-root) behaviour at both
/// endpoints. Each half is mapped through x = edge ± t² so the integrand
/// seen by the quadrature is smooth.
double integrate_edge_singular(const std::function<double(double)>& f, double a, double b,
                               double tol);

/// Bisection for f(x) = 0 on [lo, hi] with f(lo), f(hi) of opposite sign.
/// Stops when the bracket is narrower than `x_tol` or |f| <= f_tol.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              double f_tol = 0.0, int max_iter = 400);

}  // namespace spiked
