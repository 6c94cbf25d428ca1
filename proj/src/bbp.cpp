#include "spiked/bbp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spiked/errors.hpp"
#include "spiked/linalg.hpp"
#include "spiked/quadrature.hpp"

namespace spiked {

namespace {

void require_phi(double phi) {
  if (!(phi >= 1.0) || !std::isfinite(phi)) throw std::invalid_argument("phi must be finite and >= 1");
}

}  // namespace

double critical_snr(double phi) {
  require_phi(phi);
  return std::sqrt(phi);
}

BbpPrediction predict(double lambda, double phi) {
  require_phi(phi);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("predict: lambda must be finite and >= 0");
  }
  BbpPrediction p;
  p.lambda = lambda;
  p.phi = phi;
  p.above_threshold = lambda > 1.0;
  if (!p.above_threshold) {
    p.outlier = phi + 1.0;
    return p;
  }
  const double l2 = lambda * lambda;
  const double l4 = l2 * l2;
  p.outlier = std::sqrt(phi * phi + (l2 + 1.0 / l2) * phi + 1.0);
  p.left_overlap = std::sqrt((l4 - 1.0) / (l4 + l2 / phi));
  p.right_overlap = std::sqrt((l4 - 1.0) / (l2 * (l2 + phi)));
  return p;
}

double unfolding_phi(std::size_t n, std::size_t k, std::size_t q) {
  if (n < 1 || q < 1 || 2 * q > k) throw std::invalid_argument("unfolding_phi: need 1 <= q <= k/2");
  return std::pow(static_cast<double>(n), (static_cast<double>(k) - 2.0 * static_cast<double>(q)) / 2.0);
}

double tensor_critical_beta(std::size_t n, std::size_t k) {
  if (n < 1 || k < 2) throw std::invalid_argument("tensor_critical_beta: need n >= 1, k >= 2");
  return std::pow(static_cast<double>(n), (static_cast<double>(k) - 2.0) / 4.0);
}

BetaEstimate beta_hat(double s1_hat, double phi) {
  require_phi(phi);
  if (!(s1_hat >= 0.0) || !std::isfinite(s1_hat)) {
    throw std::invalid_argument("beta_hat: s1_hat must be finite and >= 0");
  }
  const double s2 = s1_hat * s1_hat;
  const double shifted = s2 - (phi * phi + 1.0);
  if (s1_hat > phi + 1.0) {
    const double upper = (s1_hat - phi - 1.0) * (s1_hat + phi + 1.0);
    const double lower = (s1_hat - phi + 1.0) * (s1_hat + phi - 1.0);
    return {std::sqrt(0.5 * (shifted + std::sqrt(upper * lower))), false};
  }
  return {std::sqrt(0.5 * std::max(0.0, shifted)), true};
}

ResolventEvaluator::ResolventEvaluator(const DenseMatrix& z, std::span<const double> v,
                                       std::span<const double> u)
    : gram_(gram(z)), v_(v.begin(), v.end()), uu_(dot(u, u)), cols_(z.cols()) {
  if (v.size() != z.rows() || u.size() != z.cols()) {
    throw std::invalid_argument("resolvent: signal lengths do not match Z");
  }
  zu_ = z.multiply(u);
  const Vector ev = symmetric_eigenvalues(gram_);
  s1_ = std::sqrt(std::max(0.0, ev.front()));
}

ResolventTriple ResolventEvaluator::at(double x) const {
  if (!(x > s1_)) throw ShiftInsideSpectrumError();
  const ShiftedGramFactor factor(gram_, x);
  const Vector kv = factor.solve(v_);
  const Vector kzu = factor.solve(zu_);
  ResolventTriple r;
  r.x = x;
  r.a = dot(v_, kv);
  r.b = dot(v_, kzu) / x;
  r.c = (uu_ + dot(zu_, kzu) / x) / x;
  return r;
}

double ResolventEvaluator::master_function(double x, double beta) const {
  const ResolventTriple r = at(x);
  const double d = 1.0 / beta - r.b;
  return d * d - r.a * r.c;
}

ResolventTriple empirical_resolvent(const DenseMatrix& z, std::span<const double> v,
                                    std::span<const double> u, double x) {
  return ResolventEvaluator(z, v, u).at(x);
}

std::optional<double> master_equation_root(const ResolventEvaluator& evaluator, double beta,
                                           const MasterRootOptions& options) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("master_equation_root: beta must be positive");
  }
  if (options.grid_points < 2) throw std::invalid_argument("master_equation_root: grid_points < 2");
  const double n = static_cast<double>(evaluator.rows());
  const double m = static_cast<double>(evaluator.cols());
  const double phi = std::sqrt(std::max(m, n) / std::min(m, n));
  const double s1 = evaluator.top_noise_singular_value();
  const double window = options.edge_window >= 0.0 ? options.edge_window : std::pow(n, -2.0 / 3.0);

  const double lo_offset = std::max(1e-6 * (phi + 1.0), window);
  double hi = options.x_max > 0.0 ? options.x_max : std::max(2.0 * beta, 2.0 * (phi + 1.0));
  if (hi <= s1 + lo_offset) hi = 2.0 * (s1 + lo_offset);

  auto f = [&](double x) { return evaluator.master_function(x, beta); };
  const auto points = static_cast<std::size_t>(options.grid_points);
  std::vector<double> xs(points);
  std::vector<double> fs(points);
  for (int doubling = 0;; ++doubling) {
    const double ratio = (hi - s1) / lo_offset;
    for (std::size_t j = 0; j < points; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(points - 1);
      xs[j] = j + 1 == points ? hi : s1 + lo_offset * std::pow(ratio, t);
      fs[j] = f(xs[j]);
    }
    if (fs.back() > 0.0) break;
    if (doubling >= options.max_doublings) throw BracketExhaustedError(hi);
    hi *= 2.0;
  }

  // rightmost j with f <= 0; f(x_max) > 0 so the sign change is in (x_j, x_{j+1}]
  std::size_t j = points - 1;
  while (j > 0 && fs[j - 1] > 0.0) --j;
  if (j == 0) return std::nullopt;
  --j;
  if (fs[j] == 0.0) return xs[j];
  return bisect(f, xs[j], xs[j + 1], options.x_tol * xs[j + 1]);
}

std::optional<double> master_equation_root(const DenseMatrix& z, std::span<const double> v,
                                           std::span<const double> u, double beta,
                                           const MasterRootOptions& options) {
  return master_equation_root(ResolventEvaluator(z, v, u), beta, options);
}

}  // namespace spiked
