#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spiked/bbp.hpp"
#include "spiked/errors.hpp"
#include "spiked/linalg.hpp"
#include "spiked/tensor.hpp"

using namespace spiked;

namespace {

std::vector<Vector> random_signals(std::size_t k, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(random_unit_vector(rng, n));
  return out;
}

DenseTensor pure_signal(const std::vector<Vector>& signals, double beta = 1.0) {
  SpikedTensorModel model;
  model.order = signals.size();
  model.dim = signals.front().size();
  model.beta = beta;
  model.signals = signals;
  TensorSampleOptions opts;
  opts.noise_scale = 0.0;
  return sample_spiked_tensor(model, opts);
}

DenseTensor noisy(std::size_t k, std::size_t n, double lambda, std::uint64_t seed, std::vector<Vector>* signals = nullptr) {
  SpikedTensorModel model;
  model.order = k;
  model.dim = n;
  model.beta = lambda * tensor_critical_beta(n, k);
  model.signals = random_signals(k, n, seed);
  model.noise_seed = mix64(seed);
  if (signals) *signals = model.signals;
  return sample_spiked_tensor(model);
}

// All strictly increasing axis sets with 1 <= |I| <= k − 1.
std::vector<std::vector<std::size_t>> axis_sets(std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << k); ++mask) {
    std::vector<std::size_t> axes;
    for (std::size_t t = 0; t < k; ++t) {
      if (mask >> t & 1U) axes.push_back(t);
    }
    out.push_back(axes);
  }
  return out;
}

std::vector<Vector> pick(const std::vector<Vector>& v, const std::vector<std::size_t>& axes) {
  std::vector<Vector> out;
  for (std::size_t a : axes) out.push_back(v[a]);
  return out;
}

}  // namespace

TEST_CASE("tensor storage is axis-0 fastest") {
  std::vector<double> entries(8);
  std::iota(entries.begin(), entries.end(), 0.0);
  const DenseTensor x(3, 2, entries);
  const std::vector<std::size_t> idx{1, 0, 1};
  CHECK(x.linear_index(idx) == 1 + 0 * 2 + 1 * 4);
  CHECK(x.at(idx) == 5.0);
  CHECK_THROWS(x.linear_index(std::vector<std::size_t>{2, 0, 0}));
  CHECK_THROWS(DenseTensor(3, 2, std::vector<double>(7)));
  CHECK_THROWS(DenseTensor(1, 2, std::vector<double>(2)));
}

TEST_CASE("memory cap") {
  CHECK_THROWS_AS(DenseTensor(3, 100, 999'999), MemoryCapError);
  CHECK_NOTHROW(DenseTensor(3, 10, 1000));
  CHECK_THROWS_AS(checked_tensor_size(40, 1000, kDefaultMemoryCap), MemoryCapError);
}

TEST_CASE("vec_kron ordering") {
  CHECK(vec_kron(std::vector<Vector>{{0.6, 0.8}}) == Vector{0.6, 0.8});
  CHECK(vec_kron(std::vector<Vector>{{1, 0}, {0, 1}}) == Vector{0, 0, 1, 0});
  const std::vector<Vector> v = random_signals(3, 4, 1);
  CHECK(norm2(vec_kron(v)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(vec_kron(std::vector<Vector>{}));
}

TEST_CASE("sampling") {
  SUBCASE("zero tensor") {
    SpikedTensorModel model;
    model.order = 3;
    model.dim = 3;
    model.signals = random_signals(3, 3, 2);
    TensorSampleOptions opts;
    opts.noise_scale = 0.0;
    const DenseTensor x = sample_spiked_tensor(model, opts);
    for (double e : x.entries()) CHECK(e == 0.0);
  }
  SUBCASE("pure signal has a single unit entry") {
    const DenseTensor x = pure_signal({{1, 0}, {1, 0}});
    CHECK(x.entries()[0] == 1.0);
    CHECK(std::count(x.entries().begin(), x.entries().end(), 0.0) == 3);
  }
  SUBCASE("noise moments, k = 3, n = 50") {
    const std::size_t n = 50;
    SpikedTensorModel model;
    model.order = 3;
    model.dim = n;
    model.signals = random_signals(3, n, 3);
    model.noise_seed = 12;
    for (NoiseKind kind : {NoiseKind::gaussian, NoiseKind::rademacher}) {
      model.noise_kind = kind;
      const DenseTensor x = sample_spiked_tensor(model);
      double mean = 0.0, sq = 0.0;
      for (double e : x.entries()) {
        mean += e;
        sq += e * e;
      }
      const double count = static_cast<double>(x.size());
      mean /= count;
      const double var = sq / count - mean * mean;
      CHECK(std::abs(mean) <= 4.0 / std::sqrt(count * n));
      CHECK(var == doctest::Approx(1.0 / n).epsilon(0.05));
    }
  }
  SUBCASE("deterministic given the seed") {
    SpikedTensorModel model;
    model.order = 3;
    model.dim = 6;
    model.beta = 2.0;
    model.signals = random_signals(3, 6, 5);
    model.noise_seed = 77;
    CHECK(std::ranges::equal(sample_spiked_tensor(model).entries(), sample_spiked_tensor(model).entries()));
  }
  SUBCASE("invalid models") {
    SpikedTensorModel model;
    model.order = 3;
    model.dim = 4;
    model.signals = random_signals(2, 4, 1);
    CHECK_THROWS_AS(sample_spiked_tensor(model), std::invalid_argument);
    model.signals = random_signals(3, 4, 1);
    model.signals[1][0] += 1e-6;
    CHECK_THROWS_AS(sample_spiked_tensor(model), std::invalid_argument);
    model.signals = random_signals(3, 4, 1);
    model.beta = -1.0;
    CHECK_THROWS_AS(sample_spiked_tensor(model), std::invalid_argument);
  }
}

TEST_CASE("unfolding index map") {
  // k = 3, n = 2, axes {1}: entry (0, 1, 1) lands at row 1, column 0 + 1·2 = 2
  std::vector<double> entries(8, 0.0);
  DenseTensor x(3, 2, entries);
  x.entries()[x.linear_index(std::vector<std::size_t>{0, 1, 1})] = 7.0;
  const DenseMatrix m = unfold(x, std::vector<std::size_t>{1});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 4);
  CHECK(m(1, 2) == 7.0);

  SUBCASE("order-2 unfolding is the natural matrix") {
    std::vector<double> e(9);
    std::iota(e.begin(), e.end(), 1.0);
    const DenseTensor t(2, 3, e);
    const DenseMatrix a = unfold(t, std::vector<std::size_t>{0});
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(a(i, j) == t.at(std::vector<std::size_t>{i, j}));
    }
  }
  SUBCASE("invalid axis sets") {
    CHECK_THROWS(unfold(x, std::vector<std::size_t>{}));
    CHECK_THROWS(unfold(x, std::vector<std::size_t>{0, 1, 2}));
    CHECK_THROWS(unfold(x, std::vector<std::size_t>{1, 0}));
    CHECK_THROWS(unfold(x, std::vector<std::size_t>{3}));
  }
}

TEST_CASE("unfolding general entries against the index formula") {
  const std::size_t k = 4, n = 3;
  std::vector<double> e(81);
  std::iota(e.begin(), e.end(), 0.0);
  const DenseTensor x(k, n, e);
  for (const auto& axes : axis_sets(k)) {
    const DenseMatrix m = unfold(x, axes);
    const std::vector<std::size_t> rest = complement_axes(k, axes);
    for (std::size_t lin = 0; lin < x.size(); ++lin) {
      std::vector<std::size_t> idx(k);
      std::size_t r = lin;
      for (std::size_t t = 0; t < k; ++t) {
        idx[t] = r % n;
        r /= n;
      }
      std::size_t a = 0, b = 0, p = 1;
      for (std::size_t ax : axes) {
        a += idx[ax] * p;
        p *= n;
      }
      p = 1;
      for (std::size_t ax : rest) {
        b += idx[ax] * p;
        p *= n;
      }
      CHECK(m(a, b) == x.entries()[lin]);
    }
  }
}

TEST_CASE("rank-one unfolding identity and bijectivity for k <= 5, n <= 6") {
  for (std::size_t k = 2; k <= 5; ++k) {
    for (std::size_t n = 2; n <= 6; ++n) {
      const std::vector<Vector> v = random_signals(k, n, 10 * k + n);
      const DenseTensor x = pure_signal(v);
      std::vector<double> sorted_x(x.entries().begin(), x.entries().end());
      std::sort(sorted_x.begin(), sorted_x.end());
      for (const auto& axes : axis_sets(k)) {
        const DenseMatrix m = unfold(x, axes);
        const Vector vi = vec_kron(pick(v, axes));
        const Vector ui = vec_kron(pick(v, complement_axes(k, axes)));
        // same k-fold product in two association orders: at most 2(k−1) roundings apart
        const double ulps = 2.0 * static_cast<double>(k - 1) * std::numeric_limits<double>::epsilon();
        bool exact = true;
        for (std::size_t a = 0; a < m.rows(); ++a) {
          for (std::size_t b = 0; b < m.cols(); ++b) {
            const double p = vi[a] * ui[b];
            exact = exact && std::abs(m(a, b) - p) <= ulps * std::abs(p);
          }
        }
        CHECK(exact);
        std::vector<double> sorted_m(m.entries().begin(), m.entries().end());
        std::sort(sorted_m.begin(), sorted_m.end());
        CHECK(sorted_m == sorted_x);
      }
    }
  }
}

TEST_CASE("complementary unfoldings share their singular values") {
  const DenseTensor x = noisy(4, 5, 1.5, 9);
  const std::vector<std::size_t> axes{0, 2};
  const DenseMatrix a = unfold(x, axes);
  const DenseMatrix b = unfold(x, complement_axes(4, axes));
  const Vector sa = full_singular_values(a);
  const Vector sb = full_singular_values(b);
  CHECK(std::abs(sa[0] - sb[0]) <= 1e-10);

  const DenseTensor y = noisy(3, 6, 1.5, 10);
  const DenseMatrix c = unfold(y, std::vector<std::size_t>{1});
  const DenseMatrix d = unfold(y, std::vector<std::size_t>{0, 2});
  CHECK(std::abs(full_singular_values(c)[0] - full_singular_values(d.transposed())[0]) <= 1e-10);
}

TEST_CASE("normalized unfolding") {
  const DenseTensor x = noisy(4, 4, 1.0, 3);
  const std::vector<std::size_t> one{2};
  CHECK(normalized_unfold(x, one) == unfold(x, one));
  const std::vector<std::size_t> two{0, 3};
  const DenseMatrix raw = unfold(x, two);
  const DenseMatrix half = normalized_unfold(x, two);
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(half.entries()[i] == doctest::Approx(raw.entries()[i] / 2.0));

  SUBCASE("noise entry variance is n^-q") {
    SpikedTensorModel model;
    model.order = 4;
    model.dim = 8;
    model.signals = random_signals(4, 8, 4);
    model.noise_seed = 5;
    const DenseMatrix m = normalized_unfold(sample_spiked_tensor(model), std::vector<std::size_t>{1, 2});
    double sq = 0.0;
    for (double e : m.entries()) sq += e * e;
    CHECK(sq / static_cast<double>(m.size()) == doctest::Approx(1.0 / 64.0).epsilon(0.05));
  }
}

TEST_CASE("axis operator matches the explicit unfolding") {
  const DenseTensor x = noisy(3, 5, 1.2, 21);
  Rng rng(1);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const MatrixFreeOperator op = axis_operator(x, axis);
    const DenseMatrix m = unfold(x, std::vector<std::size_t>{axis});
    REQUIRE(op.rows == 5);
    REQUIRE(op.cols == 25);
    const Vector in = standard_normal_vector(rng, 25);
    const Vector y = standard_normal_vector(rng, 5);
    Vector a(5), b(25);
    op.apply(in, a);
    op.apply_transpose(y, b);
    const Vector ea = m.multiply(in);
    const Vector eb = m.multiply_transpose(y);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a[i] - ea[i]) <= 1e-13);
    for (std::size_t i = 0; i < 25; ++i) CHECK(std::abs(b[i] - eb[i]) <= 1e-13);
    CHECK(std::abs(dot(y, a) - dot(b, in)) <= 1e-12 * norm2(y) * norm2(in));
    const DenseMatrix g = op.gram();
    const DenseMatrix eg = gram(m);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g.entries()[i] - eg.entries()[i]) <= 1e-13);
  }
}

TEST_CASE("algorithm1 on a pure signal") {
  const std::vector<Vector> v = random_signals(3, 10, 8);
  const DenseTensor x = pure_signal(v, 5.0);
  const std::vector<AxisEstimate> est = algorithm1(x);
  REQUIRE(est.size() == 3);
  const double phi = std::sqrt(10.0);
  for (const AxisEstimate& e : est) {
    CHECK(e.converged);
    CHECK(e.s1_hat == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(std::abs(dot(e.v_hat, v[e.axis])) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm2(e.v_hat) == doctest::Approx(1.0).epsilon(1e-12));
    // 5 <= φ + 1 ≈ 4.16 is false, so the estimate is unclamped
    CHECK(e.below_threshold == (5.0 <= phi + 1.0));
    CHECK(e.beta_hat == doctest::Approx(beta_hat(5.0, phi).value).epsilon(1e-12));
  }
}

TEST_CASE("algorithm1 is deterministic") {
  const DenseTensor x = noisy(3, 12, 1.5, 4);
  PowerIterationOptions opts;
  opts.seed = 99;
  const std::vector<AxisEstimate> a = algorithm1(x, opts);
  const std::vector<AxisEstimate> b = algorithm1(x, opts);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].s1_hat == b[i].s1_hat);
    CHECK(a[i].beta_hat == b[i].beta_hat);
    CHECK(a[i].v_hat == b[i].v_hat);
    CHECK(a[i].iterations == b[i].iterations);
  }
}

TEST_CASE("algorithm1 reports non-convergence per axis") {
  const DenseTensor x = noisy(3, 12, 0.3, 4);
  PowerIterationOptions opts;
  opts.max_iter = 2;
  const std::vector<AxisEstimate> est = algorithm1(x, opts);
  REQUIRE(est.size() == 3);
  for (const AxisEstimate& e : est) {
    CHECK_FALSE(e.converged);
    CHECK_FALSE(e.error.empty());
    CHECK(norm2(e.v_hat) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.s1_hat > 0.0);
  }
}

TEST_CASE("algorithm1 at n = 100, k = 3") {
  std::vector<Vector> v;
  SUBCASE("lambda = 2 recovers the signals") {
    const DenseTensor x = noisy(3, 100, 2.0, 31, &v);
    const double expected = predict(2.0, 10.0).left_overlap;
    for (const AxisEstimate& e : algorithm1(x)) CHECK(std::abs(std::abs(dot(e.v_hat, v[e.axis])) - expected) <= 0.05);
  }
  SUBCASE("lambda = 0.5 does not") {
    const DenseTensor x = noisy(3, 100, 0.5, 32, &v);
    for (const AxisEstimate& e : algorithm1(x)) CHECK(std::abs(dot(e.v_hat, v[e.axis])) <= 0.3);
  }
}

TEST_CASE("threshold is shared by the q = 1 and q = 2 unfoldings (k = 4, n = 30)") {
  const std::size_t k = 4, n = 30, trials = 20;
  const std::vector<std::size_t> q1{0};
  const std::vector<std::size_t> q2{0, 1};
  const double phi1 = unfolding_phi(n, k, 1);
  const double phi2 = unfolding_phi(n, k, 2);
  for (double lambda : {2.0, 0.5}) {
    std::size_t out1 = 0, out2 = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const DenseTensor x = noisy(k, n, lambda, 1000 * static_cast<std::uint64_t>(lambda * 4) + t);
      out1 += full_singular_values(normalized_unfold(x, q1))[0] > phi1 + 1.0 + 0.1;
      out2 += full_singular_values(normalized_unfold(x, q2))[0] > phi2 + 1.0 + 0.1;
    }
    CAPTURE(lambda);
    if (lambda > 1.0) {
      CHECK(out1 > trials / 2);
      CHECK(out2 > trials / 2);
    } else {
      CHECK(out1 < trials / 2);
      CHECK(out2 < trials / 2);
    }
  }
}
