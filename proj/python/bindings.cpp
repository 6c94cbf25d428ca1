#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "spiked/bbp.hpp"
#include "spiked/harness.hpp"
#include "spiked/linalg.hpp"
#include "spiked/mp_law.hpp"
#include "spiked/tensor.hpp"

namespace py = pybind11;
using namespace spiked;

namespace {

using CArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

DenseMatrix to_matrix(const CArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Vector to_vector(const CArray& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  return Vector(a.data(), a.data() + a.shape(0));
}

py::array_t<double> from_vector(const Vector& v) { return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data()); }

py::array_t<double> from_matrix(const DenseMatrix& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.entries().begin(), m.entries().end(), out.mutable_data());
  return out;
}

// Axis 0 varies fastest in memory, which is numpy's Fortran order.
DenseTensor to_tensor(const FArray& a) {
  if (a.ndim() < 2) throw std::invalid_argument("expected an array with at least 2 dimensions");
  const auto n = static_cast<std::size_t>(a.shape(0));
  for (py::ssize_t d = 1; d < a.ndim(); ++d) {
    if (static_cast<std::size_t>(a.shape(d)) != n) throw std::invalid_argument("tensor must have equal dimensions");
  }
  return DenseTensor(static_cast<std::size_t>(a.ndim()), n, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array from_tensor(const DenseTensor& x) {
  std::vector<py::ssize_t> shape(x.order(), static_cast<py::ssize_t>(x.dim()));
  std::vector<py::ssize_t> strides(x.order());
  py::ssize_t s = sizeof(double);
  for (std::size_t t = 0; t < x.order(); ++t) {
    strides[t] = s;
    s *= static_cast<py::ssize_t>(x.dim());
  }
  py::array_t<double> out(shape, strides);
  std::copy(x.entries().begin(), x.entries().end(), out.mutable_data());
  return out;
}

py::dict prediction_dict(const BbpPrediction& p) {
  py::dict d;
  d["lambda"] = p.lambda;
  d["phi"] = p.phi;
  d["above_threshold"] = p.above_threshold;
  d["outlier"] = p.outlier;
  d["left_overlap"] = p.left_overlap;
  d["right_overlap"] = p.right_overlap;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spiked matrix and tensor PCA: predictions, estimators and sweeps";

  m.def("critical_snr", &critical_snr, py::arg("phi"));
  m.def(
      "predict", [](double lambda, double phi) { return prediction_dict(predict(lambda, phi)); },
      py::arg("lambda_"), py::arg("phi"), "BBP predictions for beta = lambda * sqrt(phi).");
  m.def(
      "beta_hat",
      [](double s1, double phi) {
        const BetaEstimate b = beta_hat(s1, phi);
        return py::make_tuple(b.value, b.below_threshold);
      },
      py::arg("s1_hat"), py::arg("phi"), "Returns (estimate, below_threshold).");
  m.def("unfolding_phi", &unfolding_phi, py::arg("n"), py::arg("k"), py::arg("q") = 1);
  m.def("tensor_critical_beta", &tensor_critical_beta, py::arg("n"), py::arg("k"));

  m.def("mp_density", [](double phi, double x) { return mp_density(MpLaw(phi), x); }, py::arg("phi"), py::arg("x"));
  m.def(
      "singular_density", [](double phi, double x) { return singular_density(MpLaw(phi), x); }, py::arg("phi"),
      py::arg("x"));
  m.def(
      "mp_quantile", [](double phi, std::size_t i, std::size_t n) { return mp_quantile(MpLaw(phi), i, n); },
      py::arg("phi"), py::arg("i"), py::arg("n"));
  m.def(
      "stieltjes", [](double phi, std::complex<double> z) { return stieltjes(MpLaw(phi), z); }, py::arg("phi"),
      py::arg("z"));

  m.def(
      "top_singular_triple",
      [](const CArray& a, std::uint64_t seed, double tol, std::size_t max_iter) {
        const DenseMatrix mat = to_matrix(a);
        PowerIterationOptions opts;
        opts.seed = seed;
        opts.tol = tol;
        opts.max_iter = max_iter;
        const SingularTriple t = top_singular_triple(dense_operator(mat), opts);
        return py::make_tuple(t.value, from_vector(t.left), from_vector(t.right));
      },
      py::arg("matrix"), py::arg("seed") = 0, py::arg("tol") = 1e-10, py::arg("max_iter") = 20000,
      "Returns (value, left, right).");
  m.def(
      "full_singular_values", [](const CArray& a) { return from_vector(full_singular_values(to_matrix(a))); },
      py::arg("matrix"));
  m.def(
      "empirical_resolvent",
      [](const CArray& z, const CArray& v, const CArray& u, double x) {
        const ResolventTriple r = empirical_resolvent(to_matrix(z), to_vector(v), to_vector(u), x);
        return py::make_tuple(r.a, r.b, r.c);
      },
      py::arg("z"), py::arg("v"), py::arg("u"), py::arg("x"), "Returns (A, B, C).");
  m.def(
      "master_equation_root",
      [](const CArray& z, const CArray& v, const CArray& u, double beta) {
        return master_equation_root(to_matrix(z), to_vector(v), to_vector(u), beta);
      },
      py::arg("z"), py::arg("v"), py::arg("u"), py::arg("beta"));

  m.def(
      "sample_spiked_tensor",
      [](std::size_t k, std::size_t n, double beta, const std::vector<CArray>& signals, std::uint64_t seed,
         const std::string& noise, double noise_scale) {
        SpikedTensorModel model;
        model.order = k;
        model.dim = n;
        model.beta = beta;
        for (const CArray& s : signals) model.signals.push_back(to_vector(s));
        model.noise_seed = seed;
        model.noise_kind = parse_noise_kind(noise);
        TensorSampleOptions opts;
        opts.noise_scale = noise_scale;
        opts.memory_cap = memory_cap_from_env();
        return from_tensor(sample_spiked_tensor(model, opts));
      },
      py::arg("k"), py::arg("n"), py::arg("beta"), py::arg("signals"), py::arg("seed") = 0,
      py::arg("noise") = "gaussian", py::arg("noise_scale") = 1.0);
  m.def(
      "unfold",
      [](const FArray& x, const std::vector<std::size_t>& axes, bool normalized) {
        const DenseTensor t = to_tensor(x);
        return from_matrix(normalized ? normalized_unfold(t, axes) : unfold(t, axes));
      },
      py::arg("tensor"), py::arg("axes"), py::arg("normalized") = false,
      "Matricization along 0-based `axes`; axis 0 of the tensor varies fastest in row and column indices.");
  m.def(
      "vec_kron",
      [](const std::vector<CArray>& vs) {
        std::vector<Vector> vectors;
        for (const CArray& v : vs) vectors.push_back(to_vector(v));
        return from_vector(vec_kron(vectors));
      },
      py::arg("vectors"));
  m.def(
      "algorithm1",
      [](const FArray& x, std::uint64_t seed) {
        PowerIterationOptions opts;
        opts.seed = seed;
        py::list out;
        for (const AxisEstimate& e : algorithm1(to_tensor(x), opts)) {
          py::dict d;
          d["axis"] = e.axis;
          d["s1_hat"] = e.s1_hat;
          d["beta_hat"] = e.beta_hat;
          d["below_threshold"] = e.below_threshold;
          d["v_hat"] = from_vector(e.v_hat);
          d["iterations"] = e.iterations;
          d["converged"] = e.converged;
          out.append(d);
        }
        return out;
      },
      py::arg("tensor"), py::arg("seed") = 0, "Per-axis top singular pair and beta estimate.");

  m.def(
      "run_sweep",
      [](const std::string& config_json) {
        const SweepConfig c = sweep_config_from_json(config_json);
        std::vector<TrialRecord> records;
        {
          py::gil_scoped_release release;
          records = run_sweep(c);
        }
        std::ostringstream rec, agg;
        write_records_csv(rec, records);
        write_aggregate_csv(agg, aggregate(records));
        return py::make_tuple(rec.str(), agg.str());
      },
      py::arg("config_json"), "Runs a sweep from a JSON config; returns (records_csv, aggregate_csv).");
}
