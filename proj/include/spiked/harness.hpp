#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spiked/bbp.hpp"
#include "spiked/linalg.hpp"
#include "spiked/random.hpp"
#include "spiked/tensor.hpp"

namespace spiked {

enum class SweepMode { matrix, tensor };
enum class SignalKind { gaussian_unit, basis, given };

SweepMode parse_sweep_mode(std::string_view name);
std::string_view to_string(SweepMode mode);
SignalKind parse_signal_kind(std::string_view name);
std::string_view to_string(SignalKind kind);

struct SweepConfig {
  SweepMode mode = SweepMode::matrix;
  std::size_t n = 100;
  std::size_t m = 0;  // matrix mode: number of columns (>= n)
  std::size_t k = 3;  // tensor mode: order
  std::vector<double> lambda_grid;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  NoiseKind noise_kind = NoiseKind::gaussian;
  SignalKind signal_kind = SignalKind::gaussian_unit;
  /// For SignalKind::given. Matrix mode: {v, u}. Tensor mode: one vector per
  /// axis, or a single vector shared by all axes. Normalized on use.
  std::vector<Vector> signals;
  std::string output_path = ".";
  std::size_t jobs = 1;
  std::size_t memory_cap = kDefaultMemoryCap;
  double power_tol = 1e-10;
  std::size_t power_max_iter = 20000;

  void validate() const;
  /// φ of the analysed matrix: √(m/n), or n^((k−2)/2) for the mode unfoldings.
  double phi() const;
  /// Columns of the analysed matrix: m, or n^(k−1).
  std::size_t analysed_cols() const;
  /// β = λ√φ (matrix) or λ n^((k−2)/4) (tensor).
  double beta_for(double lambda) const;
};

struct Observation {
  std::size_t axis = 0;  // 0-based mode index; 0 in matrix mode
  double s1_hat = 0.0;
  double beta_hat = 0.0;
  bool below_threshold = true;
  double overlap_left = 0.0;
  double overlap_right = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

struct TrialRecord {
  SweepMode mode = SweepMode::matrix;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t lambda_index = 0;
  double lambda = 0.0;
  double beta = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  /// One entry in matrix mode, one per axis in tensor mode.
  std::vector<Observation> observations;
  BbpPrediction predicted;

  bool ok() const noexcept;
};

/// Seed of trial `trial` at grid point `lambda_index`.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t lambda_index, std::size_t trial) noexcept;

TrialRecord run_matrix_trial(const SweepConfig& config, std::size_t lambda_index, std::size_t trial);
TrialRecord run_tensor_trial(const SweepConfig& config, std::size_t lambda_index, std::size_t trial);

/// All (λ, trial) records ordered by λ index then trial. Trials run on up to
/// config.jobs threads; the result does not depend on the thread count.
std::vector<TrialRecord> run_sweep(const SweepConfig& config);
std::vector<TrialRecord> run_matrix_sweep(const SweepConfig& config);
std::vector<TrialRecord> run_tensor_sweep(const SweepConfig& config);

struct Statistic {
  double mean = 0.0;
  double se = 0.0;  // sample sd / √count
  std::size_t count = 0;
};

/// Mean and standard error; se = 0 for a single value.
Statistic summarize(const std::vector<double>& values);

struct AggregateRow {
  SweepMode mode = SweepMode::matrix;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  double lambda = 0.0;
  double beta = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  /// Statistics over successful trials; absent when every trial failed.
  /// Tensor trials contribute the mean over their axes.
  std::optional<Statistic> s1_hat;
  std::optional<Statistic> beta_hat;
  std::optional<Statistic> overlap_left;
  std::optional<Statistic> overlap_right;
  BbpPrediction predicted;

  bool all_failed() const noexcept { return !s1_hat.has_value(); }
};

/// Groups by λ (in grid order). Throws on an empty input.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

struct Histogram {
  double phi = 1.0;
  double lo = 0.0;
  double bin_width = 0.0;
  std::vector<double> centers;
  std::vector<double> density;  // normalized: Σ density · width = 1
  std::vector<double> theory;   // ρ_φ at the bin centers
  Vector singular_values;       // descending
};

/// Empirical singular-value histogram of one n x m noise matrix (n <= m) with
/// the limiting density overlaid. The binned range covers both the sample and
/// [φ − 1, φ + 1].
Histogram spectrum_histogram(std::size_t n, std::size_t m, std::uint64_t seed, std::size_t bins,
                             NoiseKind noise = NoiseKind::gaussian);

// ---- persistence -----------------------------------------------------------

/// Exact record CSV header (one line, no trailing newline).
std::string_view record_csv_header();
std::string_view aggregate_csv_header();

/// One row per record (matrix) or per (record, axis) (tensor; axis 1-based).
void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_histogram_csv(std::ostream& out, const Histogram& histogram);

/// Parses a SweepConfig from JSON text with snake_case keys.
SweepConfig sweep_config_from_json(std::string_view text);
std::string sweep_config_to_json(const SweepConfig& config);
SweepConfig load_sweep_config(const std::string& path);

/// printf "%.17g": round-trips every finite double.
std::string format_double(double value);

}  // namespace spiked
