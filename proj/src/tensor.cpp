#include "spiked/tensor.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "spiked/bbp.hpp"
#include "spiked/errors.hpp"

namespace spiked {

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

using ConstColMap = Eigen::Map<const Eigen::MatrixXd>;

}  // namespace

std::size_t memory_cap_from_env() {
  const char* raw = std::getenv("SPIKED_UNFOLD_MEM_CAP");
  if (raw == nullptr || *raw == '\0') return kDefaultMemoryCap;
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(raw, &end);
  if (errno != 0 || end == raw || *end != '\0' || !(value >= 1.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("SPIKED_UNFOLD_MEM_CAP: invalid value '") + raw + "'");
  }
  return static_cast<std::size_t>(value);
}

std::size_t checked_tensor_size(std::size_t order, std::size_t dim, std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < order; ++i) {
    if (dim != 0 && total > cap / dim) {
      throw MemoryCapError("tensor with " + std::to_string(dim) + "^" + std::to_string(order) +
                           " entries exceeds the memory cap of " + std::to_string(cap));
    }
    total *= dim;
  }
  if (total > cap) {
    throw MemoryCapError("tensor exceeds the memory cap of " + std::to_string(cap) + " entries");
  }
  return total;
}

DenseTensor::DenseTensor(std::size_t order, std::size_t dim, std::size_t memory_cap)
    : order_(order), dim_(dim) {
  if (order < 2 || dim < 2) throw std::invalid_argument("DenseTensor: need order >= 2 and dim >= 2");
  entries_.assign(checked_tensor_size(order, dim, memory_cap), 0.0);
}

DenseTensor::DenseTensor(std::size_t order, std::size_t dim, std::vector<double> entries)
    : order_(order), dim_(dim), entries_(std::move(entries)) {
  if (order < 2 || dim < 2) throw std::invalid_argument("DenseTensor: need order >= 2 and dim >= 2");
  if (entries_.size() != checked_tensor_size(order, dim, std::numeric_limits<std::size_t>::max())) {
    throw std::invalid_argument("DenseTensor: entry count is not dim^order");
  }
  for (double v : entries_) {
    if (!std::isfinite(v)) throw std::invalid_argument("DenseTensor: non-finite entry");
  }
}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> index) const {
  if (index.size() != order_) throw std::invalid_argument("DenseTensor: index has wrong order");
  std::size_t linear = 0;
  for (std::size_t t = order_; t-- > 0;) {
    if (index[t] >= dim_) throw std::out_of_range("DenseTensor: index out of range");
    linear = linear * dim_ + index[t];
  }
  return linear;
}

void SpikedTensorModel::validate() const {
  if (order < 2 || dim < 2) throw std::invalid_argument("SpikedTensorModel: need order >= 2, dim >= 2");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("SpikedTensorModel: beta must be >= 0");
  if (signals.size() != order) throw std::invalid_argument("SpikedTensorModel: need one signal per axis");
  for (const Vector& s : signals) {
    if (s.size() != dim) throw std::invalid_argument("SpikedTensorModel: signal has wrong length");
    if (std::abs(norm2(s) - 1.0) > 1e-12) throw std::invalid_argument("SpikedTensorModel: signal is not unit");
  }
}

DenseTensor sample_spiked_tensor(const SpikedTensorModel& model, const TensorSampleOptions& options) {
  model.validate();
  DenseTensor x(model.order, model.dim, options.memory_cap);
  auto data = x.entries();
  if (options.noise_scale != 0.0) {
    Rng rng(model.noise_seed);
    const double variance = options.noise_scale * options.noise_scale / static_cast<double>(model.dim);
    fill_noise(rng, model.noise_kind, variance, data);
  }
  if (model.beta != 0.0) {
    const Vector signal = vec_kron(model.signals);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += model.beta * signal[i];
  }
  return x;
}

Vector vec_kron(std::span<const Vector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("vec_kron: empty list");
  Vector out(vectors.front());
  for (std::size_t j = 1; j < vectors.size(); ++j) {
    const Vector& w = vectors[j];
    Vector next(out.size() * w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      double* block = next.data() + i * out.size();
      for (std::size_t r = 0; r < out.size(); ++r) block[r] = out[r] * w[i];
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::size_t> complement_axes(std::size_t order, std::span<const std::size_t> axes) {
  std::vector<std::size_t> rest;
  std::size_t j = 0;
  for (std::size_t t = 0; t < order; ++t) {
    if (j < axes.size() && axes[j] == t) {
      ++j;
    } else {
      rest.push_back(t);
    }
  }
  return rest;
}

DenseMatrix unfold(const DenseTensor& x, std::span<const std::size_t> axes) {
  const std::size_t k = x.order();
  const std::size_t n = x.dim();
  if (axes.empty() || axes.size() >= k) throw std::invalid_argument("unfold: need 1 <= |axes| <= k-1");
  for (std::size_t j = 0; j < axes.size(); ++j) {
    if (axes[j] >= k || (j > 0 && axes[j] <= axes[j - 1])) {
      throw std::invalid_argument("unfold: axes must be strictly increasing and < order");
    }
  }
  const std::vector<std::size_t> rest = complement_axes(k, axes);
  std::vector<std::size_t> row_stride(k, 0);
  std::vector<std::size_t> col_stride(k, 0);
  for (std::size_t j = 0; j < axes.size(); ++j) row_stride[axes[j]] = ipow(n, j);
  for (std::size_t j = 0; j < rest.size(); ++j) col_stride[rest[j]] = ipow(n, j);

  const std::size_t rows = ipow(n, axes.size());
  const std::size_t cols = ipow(n, rest.size());
  DenseMatrix out(rows, cols);
  auto dst = out.entries();
  const auto src = x.entries();
  std::vector<std::size_t> idx(k, 0);
  std::size_t a = 0;
  std::size_t b = 0;
  for (std::size_t linear = 0; linear < src.size(); ++linear) {
    dst[a * cols + b] = src[linear];
    for (std::size_t t = 0; t < k; ++t) {
      a += row_stride[t];
      b += col_stride[t];
      if (++idx[t] < n) break;
      a -= row_stride[t] * n;
      b -= col_stride[t] * n;
      idx[t] = 0;
    }
  }
  return out;
}

DenseMatrix normalized_unfold(const DenseTensor& x, std::span<const std::size_t> axes) {
  DenseMatrix m = unfold(x, axes);
  const double scale = std::pow(static_cast<double>(x.dim()), (static_cast<double>(axes.size()) - 1.0) / 2.0);
  if (scale != 1.0) {
    for (double& v : m.entries()) v /= scale;
  }
  return m;
}

MatrixFreeOperator axis_operator(const DenseTensor& x, std::size_t axis) {
  if (axis >= x.order()) throw std::invalid_argument("axis_operator: axis out of range");
  const std::size_t n = x.dim();
  const std::size_t inner = ipow(n, axis);
  const std::size_t outer = ipow(n, x.order() - 1 - axis);
  const auto en = static_cast<Eigen::Index>(n);
  const auto ein = static_cast<Eigen::Index>(inner);
  const double* data = x.entries().data();

  MatrixFreeOperator op;
  op.rows = n;
  op.cols = inner * outer;
  // The mode-`axis` unfolding is a stack of `outer` slabs; slab o is the
  // column-major inner x n block at offset o·inner·n, and M = [S_0ᵀ S_1ᵀ …].
  op.apply = [=](std::span<const double> in, std::span<double> out) {
    VectorMap y(out.data(), en);
    if (inner == 1) {
      y.noalias() = ConstColMap(data, en, static_cast<Eigen::Index>(outer)) *
                    ConstVectorMap(in.data(), static_cast<Eigen::Index>(outer));
      return;
    }
    y.setZero();
    for (std::size_t o = 0; o < outer; ++o) {
      const ConstColMap slab(data + o * inner * n, ein, en);
      y.noalias() += slab.transpose() * ConstVectorMap(in.data() + o * inner, ein);
    }
  };
  op.apply_transpose = [=](std::span<const double> in, std::span<double> out) {
    const ConstVectorMap y(in.data(), en);
    if (inner == 1) {
      VectorMap(out.data(), static_cast<Eigen::Index>(outer)).noalias() =
          ConstColMap(data, en, static_cast<Eigen::Index>(outer)).transpose() * y;
      return;
    }
    for (std::size_t o = 0; o < outer; ++o) {
      const ConstColMap slab(data + o * inner * n, ein, en);
      VectorMap(out.data() + o * inner, ein).noalias() = slab * y;
    }
  };
  op.gram = [=]() {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(en, en);
    if (inner == 1) {
      g.selfadjointView<Eigen::Lower>().rankUpdate(ConstColMap(data, en, static_cast<Eigen::Index>(outer)));
    } else {
      for (std::size_t o = 0; o < outer; ++o) {
        const ConstColMap slab(data + o * inner * n, ein, en);
        g.selfadjointView<Eigen::Lower>().rankUpdate(slab.transpose());
      }
    }
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return from_eigen(g);
  };
  return op;
}

std::vector<AxisEstimate> algorithm1(const DenseTensor& x, const PowerIterationOptions& power) {
  const std::size_t n = x.dim();
  const std::size_t k = x.order();
  const double phi = std::pow(static_cast<double>(n), (static_cast<double>(k) - 2.0) / 2.0);
  std::vector<AxisEstimate> estimates;
  estimates.reserve(k);
  for (std::size_t axis = 0; axis < k; ++axis) {
    const MatrixFreeOperator op = axis_operator(x, axis);
    PowerIterationOptions opts = power;
    opts.seed = derive_seed(power.seed, axis);
    AxisEstimate est;
    est.axis = axis;
    try {
      SingularTriple t = top_singular_triple(op, opts);
      est.s1_hat = t.value;
      est.v_hat = std::move(t.left);
      est.u_hat = std::move(t.right);
      est.iterations = t.iterations;
    } catch (const NonConvergenceError& e) {
      est.converged = false;
      est.error = e.what();
      est.iterations = e.iterations();
      est.v_hat = e.last_left();
      est.u_hat.assign(op.cols, 0.0);
      op.apply_transpose(est.v_hat, est.u_hat);
      est.s1_hat = norm2(est.u_hat);
      if (est.s1_hat > 0.0) {
        for (double& u : est.u_hat) u /= est.s1_hat;
      }
    }
    const BetaEstimate b = beta_hat(est.s1_hat, phi);
    est.beta_hat = b.value;
    est.below_threshold = b.below_threshold;
    estimates.push_back(std::move(est));
  }
  return estimates;
}

}  // namespace spiked
