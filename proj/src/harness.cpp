#include "spiked/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "spiked/errors.hpp"
#include "spiked/mp_law.hpp"

namespace spiked {

SweepMode parse_sweep_mode(std::string_view name) {
  if (name == "matrix") return SweepMode::matrix;
  if (name == "tensor") return SweepMode::tensor;
  throw std::invalid_argument("unknown sweep mode: " + std::string(name));
}

std::string_view to_string(SweepMode mode) { return mode == SweepMode::matrix ? "matrix" : "tensor"; }

SignalKind parse_signal_kind(std::string_view name) {
  if (name == "gaussian-unit") return SignalKind::gaussian_unit;
  if (name == "basis") return SignalKind::basis;
  if (name == "given") return SignalKind::given;
  throw std::invalid_argument("unknown signal kind: " + std::string(name));
}

std::string_view to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::gaussian_unit: return "gaussian-unit";
    case SignalKind::basis: return "basis";
    case SignalKind::given: return "given";
  }
  return "gaussian-unit";
}

void SweepConfig::validate() const {
  if (n < 2) throw std::invalid_argument("sweep config: n must be >= 2");
  if (trials < 1) throw std::invalid_argument("sweep config: trials must be >= 1");
  if (jobs < 1) throw std::invalid_argument("sweep config: jobs must be >= 1");
  if (lambda_grid.empty()) throw std::invalid_argument("sweep config: lambda_grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] >= 0.0) || !std::isfinite(lambda_grid[i])) {
      throw std::invalid_argument("sweep config: lambda values must be finite and >= 0");
    }
    if (i > 0 && lambda_grid[i] < lambda_grid[i - 1]) {
      throw std::invalid_argument("sweep config: lambda_grid must be ascending");
    }
  }
  if (!(power_tol > 0.0) || power_max_iter < 1) throw std::invalid_argument("sweep config: bad power settings");
  if (mode == SweepMode::matrix) {
    if (m < n) throw std::invalid_argument("sweep config: matrix mode needs m >= n");
    if (n > kDenseSolverLimit) throw std::invalid_argument("sweep config: n exceeds the dense solver limit");
    if (signal_kind == SignalKind::given) {
      if (signals.size() != 2 || signals[0].size() != n || signals[1].size() != m) {
        throw std::invalid_argument("sweep config: matrix mode needs signals [v (n), u (m)]");
      }
    }
  } else {
    if (k < 2) throw std::invalid_argument("sweep config: tensor mode needs k >= 2");
    checked_tensor_size(k, n, memory_cap);
    if (signal_kind == SignalKind::given) {
      if (signals.size() != 1 && signals.size() != k) {
        throw std::invalid_argument("sweep config: tensor mode needs 1 or k given signals");
      }
      for (const Vector& s : signals) {
        if (s.size() != n) throw std::invalid_argument("sweep config: given signal has wrong length");
      }
    }
  }
}

double SweepConfig::phi() const {
  if (mode == SweepMode::matrix) return std::sqrt(static_cast<double>(m) / static_cast<double>(n));
  return std::pow(static_cast<double>(n), (static_cast<double>(k) - 2.0) / 2.0);
}

std::size_t SweepConfig::analysed_cols() const {
  if (mode == SweepMode::matrix) return m;
  std::size_t cols = 1;
  for (std::size_t i = 1; i < k; ++i) cols *= n;
  return cols;
}

double SweepConfig::beta_for(double lambda) const {
  if (mode == SweepMode::matrix) return lambda * std::sqrt(phi());
  return lambda * tensor_critical_beta(n, k);
}

bool TrialRecord::ok() const noexcept {
  return std::all_of(observations.begin(), observations.end(),
                     [](const Observation& o) { return o.converged; });
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t lambda_index, std::size_t trial) noexcept {
  return derive_seed(base_seed, lambda_index, trial);
}

namespace {

Vector normalized(Vector v) {
  normalize(v);
  return v;
}

Vector draw_signal(const SweepConfig& config, Rng& rng, std::size_t length, std::size_t which) {
  switch (config.signal_kind) {
    case SignalKind::gaussian_unit: return random_unit_vector(rng, length);
    case SignalKind::basis: return basis_vector(length, 0);
    case SignalKind::given:
      return normalized(config.signals[std::min(which, config.signals.size() - 1)]);
  }
  return basis_vector(length, 0);
}

PowerIterationOptions power_options(const SweepConfig& config, std::uint64_t seed) {
  PowerIterationOptions opts;
  opts.seed = mix64(seed);
  opts.tol = config.power_tol;
  opts.max_iter = config.power_max_iter;
  return opts;
}

TrialRecord new_record(const SweepConfig& config, std::size_t lambda_index, std::size_t trial) {
  TrialRecord r;
  r.mode = config.mode;
  r.n = config.n;
  r.m = config.analysed_cols();
  r.k = config.mode == SweepMode::tensor ? config.k : 0;
  r.lambda_index = lambda_index;
  r.lambda = config.lambda_grid.at(lambda_index);
  r.beta = config.beta_for(r.lambda);
  r.trial = trial;
  r.seed = trial_seed(config.base_seed, lambda_index, trial);
  r.predicted = predict(r.lambda, config.phi());
  return r;
}

}  // namespace

TrialRecord run_matrix_trial(const SweepConfig& config, std::size_t lambda_index, std::size_t trial) {
  TrialRecord rec = new_record(config, lambda_index, trial);
  Rng rng(rec.seed);
  const Vector v = draw_signal(config, rng, config.n, 0);
  const Vector u = draw_signal(config, rng, config.m, 1);
  DenseMatrix x(config.n, config.m);
  fill_noise(rng, config.noise_kind, 1.0 / static_cast<double>(config.n), x.entries());
  x.add_outer(rec.beta, v, u);

  const MatrixFreeOperator op = dense_operator(x);
  Observation obs;
  Vector left;
  Vector right(config.m);
  try {
    SingularTriple t = top_singular_triple(op, power_options(config, rec.seed));
    obs.s1_hat = t.value;
    obs.iterations = t.iterations;
    left = std::move(t.left);
    right = std::move(t.right);
  } catch (const NonConvergenceError& e) {
    obs.converged = false;
    obs.iterations = e.iterations();
    left = e.last_left();
    op.apply_transpose(left, right);
    obs.s1_hat = norm2(right);
    if (obs.s1_hat > 0.0) {
      for (double& r : right) r /= obs.s1_hat;
    }
  }
  const BetaEstimate b = beta_hat(obs.s1_hat, config.phi());
  obs.beta_hat = b.value;
  obs.below_threshold = b.below_threshold;
  obs.overlap_left = std::min(1.0, std::abs(dot(left, v)));
  obs.overlap_right = std::min(1.0, std::abs(dot(right, u)));
  rec.observations.push_back(obs);
  return rec;
}

TrialRecord run_tensor_trial(const SweepConfig& config, std::size_t lambda_index, std::size_t trial) {
  TrialRecord rec = new_record(config, lambda_index, trial);
  Rng rng(rec.seed);
  SpikedTensorModel model;
  model.order = config.k;
  model.dim = config.n;
  model.beta = rec.beta;
  model.noise_kind = config.noise_kind;
  for (std::size_t axis = 0; axis < config.k; ++axis) {
    model.signals.push_back(draw_signal(config, rng, config.n, axis));
  }
  model.noise_seed = rng();
  TensorSampleOptions sample;
  sample.memory_cap = config.memory_cap;
  const DenseTensor x = sample_spiked_tensor(model, sample);

  const std::vector<AxisEstimate> estimates = algorithm1(x, power_options(config, rec.seed));
  for (const AxisEstimate& est : estimates) {
    std::vector<Vector> others;
    for (std::size_t j = 0; j < config.k; ++j) {
      if (j != est.axis) others.push_back(model.signals[j]);
    }
    const Vector u = vec_kron(others);
    Observation obs;
    obs.axis = est.axis;
    obs.s1_hat = est.s1_hat;
    obs.beta_hat = est.beta_hat;
    obs.below_threshold = est.below_threshold;
    obs.overlap_left = std::min(1.0, std::abs(dot(est.v_hat, model.signals[est.axis])));
    obs.overlap_right = std::min(1.0, std::abs(dot(est.u_hat, u)));
    obs.iterations = est.iterations;
    obs.converged = est.converged;
    rec.observations.push_back(obs);
  }
  return rec;
}

std::vector<TrialRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  const std::size_t total = config.lambda_grid.size() * config.trials;
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      const std::size_t li = job / config.trials;
      const std::size_t trial = job % config.trials;
      try {
        records[job] = config.mode == SweepMode::matrix ? run_matrix_trial(config, li, trial)
                                                        : run_tensor_trial(config, li, trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  const std::size_t workers = std::min(config.jobs, total);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::vector<TrialRecord> run_matrix_sweep(const SweepConfig& config) {
  if (config.mode != SweepMode::matrix) throw std::invalid_argument("run_matrix_sweep: mode is not matrix");
  return run_sweep(config);
}

std::vector<TrialRecord> run_tensor_sweep(const SweepConfig& config) {
  if (config.mode != SweepMode::tensor) throw std::invalid_argument("run_tensor_sweep: mode is not tensor");
  return run_sweep(config);
}

Statistic summarize(const std::vector<double>& values) {
  Statistic s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.se = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  // (λ index, λ) keeps grid order and separates equal λ values from different sweeps
  std::map<std::pair<std::size_t, double>, std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& r : records) groups[{r.lambda_index, r.lambda}].push_back(&r);

  std::vector<AggregateRow> rows;
  for (const auto& [key, group] : groups) {
    const TrialRecord& first = *group.front();
    AggregateRow row;
    row.mode = first.mode;
    row.n = first.n;
    row.m = first.m;
    row.k = first.k;
    row.lambda = first.lambda;
    row.beta = first.beta;
    row.predicted = first.predicted;
    row.trials = group.size();
    std::vector<double> s1, bh, ol, orr;
    for (const TrialRecord* r : group) {
      if (!r->ok() || r->observations.empty()) {
        ++row.failures;
        continue;
      }
      double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
      for (const Observation& o : r->observations) {
        a += o.s1_hat;
        b += o.beta_hat;
        c += o.overlap_left;
        d += o.overlap_right;
      }
      const double count = static_cast<double>(r->observations.size());
      s1.push_back(a / count);
      bh.push_back(b / count);
      ol.push_back(c / count);
      orr.push_back(d / count);
    }
    if (!s1.empty()) {
      row.s1_hat = summarize(s1);
      row.beta_hat = summarize(bh);
      row.overlap_left = summarize(ol);
      row.overlap_right = summarize(orr);
    }
    rows.push_back(row);
  }
  return rows;
}

Histogram spectrum_histogram(std::size_t n, std::size_t m, std::uint64_t seed, std::size_t bins,
                             NoiseKind noise) {
  if (n < 1 || m < n) throw std::invalid_argument("spectrum_histogram: need 1 <= n <= m");
  if (n > kDenseSolverLimit) throw std::invalid_argument("spectrum_histogram: n exceeds the dense solver limit");
  if (bins < 1) throw std::invalid_argument("spectrum_histogram: bins must be >= 1");
  Rng rng(seed);
  DenseMatrix z(n, m);
  fill_noise(rng, noise, 1.0 / static_cast<double>(n), z.entries());

  Histogram h;
  h.phi = std::sqrt(static_cast<double>(m) / static_cast<double>(n));
  const MpLaw law(h.phi);
  h.singular_values = full_singular_values(z);
  const double lo = std::min(h.singular_values.back(), h.phi - 1.0);
  double hi = std::max(h.singular_values.front(), h.phi + 1.0);
  if (!(hi > lo)) hi = lo + 1.0;
  h.lo = lo;
  h.bin_width = (hi - lo) / static_cast<double>(bins);

  std::vector<std::size_t> counts(bins, 0);
  for (double s : h.singular_values) {
    auto b = static_cast<std::size_t>(std::floor((s - lo) / h.bin_width));
    ++counts[std::min(b, bins - 1)];
  }
  const double norm = 1.0 / (static_cast<double>(n) * h.bin_width);
  for (std::size_t b = 0; b < bins; ++b) {
    const double center = lo + (static_cast<double>(b) + 0.5) * h.bin_width;
    h.centers.push_back(center);
    h.density.push_back(static_cast<double>(counts[b]) * norm);
    h.theory.push_back(singular_density(law, center));
  }
  return h;
}

}  // namespace spiked
