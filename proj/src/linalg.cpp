#include "spiked/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spiked/random.hpp"

namespace spiked {

namespace {

// Negative Gram eigenvalues down to this (relative) level are roundoff.
constexpr double kNegativeClip = 1e-10;

struct EigenPair {
  double value = 0.0;
  Vector vector;
  std::size_t iterations = 0;
};

void check_options(const PowerIterationOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("power iteration: tol must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("power iteration: max_iter must be >= 1");
}

void make_sign_canonical(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (!v.empty() && v[best] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Power iteration for the top eigenpair of a PSD map given by `step`.
template <class Step>
EigenPair power_top_eigen(std::size_t dim, Step&& step, const PowerIterationOptions& options) {
  Rng rng(options.seed);
  Vector x = random_unit_vector(rng, dim);
  Vector y(dim);
  double previous = std::numeric_limits<double>::quiet_NaN();
  double change = std::numeric_limits<double>::infinity();
  double last_change = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    step(x, y);
    const double rayleigh = std::max(dot(x, y), 0.0);
    const double ny = norm2(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) {
      throw NonConvergenceError("power iteration: zero operator", x, 0.0, change, it);
    }
    const double s = std::sqrt(rayleigh);
    if (it > 1) change = s > 0.0 ? std::abs(s - previous) / s : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dim; ++i) x[i] = y[i] / ny;
    // Changes shrink geometrically with ratio q, so the distance still to go
    // is about change·q/(1−q); require change/(1−q) < tol, not just change.
    const double q = std::isfinite(last_change) && last_change > 0.0 ? std::min(change / last_change, 0.99) : 0.0;
    if (change < options.tol && (change == 0.0 || change / (1.0 - q) < options.tol)) {
      return EigenPair{rayleigh, std::move(x), it};
    }
    last_change = change;
    previous = s;
  }
  throw NonConvergenceError("power iteration did not converge in " +
                                std::to_string(options.max_iter) + " iterations (relative change " +
                                std::to_string(change) + ")",
                            std::move(x), previous, change, options.max_iter);
}

Eigen::MatrixXd as_eigen(const DenseMatrix& m) { return m.view(); }

}  // namespace

MatrixFreeOperator dense_operator(const DenseMatrix& m) {
  MatrixFreeOperator op;
  op.rows = m.rows();
  op.cols = m.cols();
  const DenseMatrix* mp = &m;
  op.apply = [mp](std::span<const double> x, std::span<double> out) {
    VectorMap(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
        mp->view() * ConstVectorMap(x.data(), static_cast<Eigen::Index>(x.size()));
  };
  op.apply_transpose = [mp](std::span<const double> y, std::span<double> out) {
    VectorMap(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
        mp->view().transpose() * ConstVectorMap(y.data(), static_cast<Eigen::Index>(y.size()));
  };
  op.gram = [mp]() { return gram(*mp); };
  return op;
}

SingularTriple top_singular_triple(const MatrixFreeOperator& op, const PowerIterationOptions& options) {
  check_options(options);
  if (op.rows == 0 || op.cols == 0) throw std::invalid_argument("power iteration: empty operator");
  if (!op.apply || !op.apply_transpose) {
    throw std::invalid_argument("power iteration: operator lacks apply/apply_transpose");
  }

  Vector scratch(op.cols);
  EigenPair pair;
  if (options.allow_gram && op.gram && op.rows <= options.gram_row_limit) {
    const DenseMatrix g = op.gram();
    const auto gv = g.view();
    pair = power_top_eigen(
        op.rows,
        [&](const Vector& x, Vector& y) {
          VectorMap(y.data(), static_cast<Eigen::Index>(y.size())).noalias() =
              gv * ConstVectorMap(x.data(), static_cast<Eigen::Index>(x.size()));
        },
        options);
  } else {
    pair = power_top_eigen(
        op.rows,
        [&](const Vector& x, Vector& y) {
          op.apply_transpose(x, scratch);
          op.apply(scratch, y);
        },
        options);
  }

  SingularTriple t;
  t.iterations = pair.iterations;
  t.left = std::move(pair.vector);
  make_sign_canonical(t.left);
  t.right.assign(op.cols, 0.0);
  op.apply_transpose(t.left, t.right);
  t.value = norm2(t.right);
  if (!(t.value > 0.0)) {
    throw NonConvergenceError("power iteration: zero operator", t.left, 0.0, 0.0, t.iterations);
  }
  for (double& x : t.right) x /= t.value;

  Vector mu(op.rows);
  op.apply(t.right, mu);
  for (std::size_t i = 0; i < op.rows; ++i) mu[i] -= t.value * t.left[i];
  t.residual = norm2(mu);
  return t;
}

double second_singular_value(const DenseMatrix& gram_matrix, const SingularTriple& top,
                             const PowerIterationOptions& options) {
  check_options(options);
  const std::size_t n = gram_matrix.rows();
  if (n != gram_matrix.cols() || top.left.size() != n) {
    throw std::invalid_argument("second_singular_value: dimension mismatch");
  }
  if (n < 2) return 0.0;
  Eigen::MatrixXd deflated = as_eigen(gram_matrix);
  const ConstVectorMap v(top.left.data(), static_cast<Eigen::Index>(n));
  deflated.noalias() -= (top.value * top.value) * (v * v.transpose());
  PowerIterationOptions opts = options;
  opts.seed = mix64(options.seed);
  try {
    const EigenPair pair = power_top_eigen(
        n,
        [&](const Vector& x, Vector& y) {
          VectorMap(y.data(), static_cast<Eigen::Index>(n)).noalias() =
              deflated * ConstVectorMap(x.data(), static_cast<Eigen::Index>(n));
        },
        opts);
    return std::sqrt(std::max(pair.value, 0.0));
  } catch (const NonConvergenceError& e) {
    // deflated matrix is zero: rank-one input
    if (e.last_value() == 0.0 && e.iterations() <= 1) return 0.0;
    throw;
  }
}

Vector symmetric_eigenvalues(const DenseMatrix& symmetric) {
  if (symmetric.rows() != symmetric.cols()) {
    throw std::invalid_argument("symmetric_eigenvalues: matrix is not square");
  }
  if (symmetric.rows() > kDenseSolverLimit) {
    throw std::invalid_argument("symmetric_eigenvalues: dimension exceeds dense solver limit");
  }
  if (!symmetric.all_finite()) throw std::invalid_argument("symmetric_eigenvalues: non-finite entry");
  if (symmetric.rows() == 0) return {};
  // Householder tridiagonalization followed by implicit symmetric QR.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(as_eigen(symmetric), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric_eigenvalues: QR iteration failed");
  }
  const auto& ev = solver.eigenvalues();
  Vector out(ev.data(), ev.data() + ev.size());
  std::reverse(out.begin(), out.end());
  return out;
}

Vector full_singular_values(const DenseMatrix& m) {
  if (m.rows() > m.cols()) {
    throw std::invalid_argument("full_singular_values: expects rows <= cols (transpose first)");
  }
  if (m.rows() > kDenseSolverLimit) {
    throw std::invalid_argument("full_singular_values: rows exceed dense solver limit");
  }
  if (!m.all_finite()) throw std::invalid_argument("full_singular_values: non-finite entry");
  Vector ev = symmetric_eigenvalues(gram(m));
  const double scale = ev.empty() ? 1.0 : std::max(1.0, ev.front());
  for (double& e : ev) {
    if (e < 0.0) {
      if (e < -kNegativeClip * scale) {
        throw std::runtime_error("full_singular_values: Gram matrix has a negative eigenvalue");
      }
      e = 0.0;
    }
    e = std::sqrt(e);
  }
  return ev;
}

DenseMatrix gram(const DenseMatrix& m) {
  if (!m.all_finite()) throw std::invalid_argument("gram: non-finite entry");
  const auto n = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  g.selfadjointView<Eigen::Lower>().rankUpdate(m.view());
  // mirror the computed triangle: exactly symmetric
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return from_eigen(g);
}

ShiftedGramFactor::ShiftedGramFactor(const DenseMatrix& gram_matrix, double shift) : shift_(shift) {
  if (!(shift > 0.0) || !std::isfinite(shift)) {
    throw std::invalid_argument("shifted gram solve: shift must be positive and finite");
  }
  const auto n = static_cast<Eigen::Index>(gram_matrix.rows());
  Eigen::MatrixXd a = -(1.0 / shift) * as_eigen(gram_matrix);
  a.diagonal().array() += shift;
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) throw ShiftInsideSpectrumError();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(llt_.matrixLLT()(i, i) > 0.0)) throw ShiftInsideSpectrumError();
  }
}

Vector ShiftedGramFactor::solve(std::span<const double> b) const {
  if (static_cast<Eigen::Index>(b.size()) != llt_.rows()) {
    throw std::invalid_argument("shifted gram solve: rhs length mismatch");
  }
  Eigen::VectorXd w = llt_.solve(ConstVectorMap(b.data(), static_cast<Eigen::Index>(b.size())));
  return Vector(w.data(), w.data() + w.size());
}

Vector shifted_gram_solve(const DenseMatrix& m, double x, std::span<const double> b) {
  if (b.size() != m.rows()) throw std::invalid_argument("shifted gram solve: rhs length mismatch");
  return ShiftedGramFactor(gram(m), x).solve(b);
}

SpectralSummary summarize_spectrum(const DenseMatrix& m, bool with_second, bool with_full,
                                   const PowerIterationOptions& options) {
  SpectralSummary summary;
  summary.top = top_singular_triple(dense_operator(m), options);
  if (with_second) summary.second_value = second_singular_value(gram(m), summary.top, options);
  if (with_full) summary.full_spectrum = full_singular_values(m);
  return summary;
}

}  // namespace spiked
