#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spiked/harness.hpp"

namespace spiked {

namespace {

using nlohmann::json;

constexpr std::string_view kRecordHeader =
    "mode,n,m,k,q,lambda,trial,seed,s1_hat,beta_hat,overlap_left,overlap_right,axis,"
    "pred_outlier,pred_overlap_left,pred_overlap_right,status";

constexpr std::string_view kAggregateHeader =
    "mode,n,m,k,lambda,beta,trials,failures,s1_hat_mean,s1_hat_se,beta_hat_mean,beta_hat_se,"
    "overlap_left_mean,overlap_left_se,overlap_right_mean,overlap_right_se,"
    "pred_outlier,pred_overlap_left,pred_overlap_right,status";

void write_stat(std::ostream& out, const std::optional<Statistic>& s) {
  if (s) {
    out << ',' << format_double(s->mean) << ',' << format_double(s->se);
  } else {
    out << ",,";
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string_view record_csv_header() { return kRecordHeader; }
std::string_view aggregate_csv_header() { return kAggregateHeader; }

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kRecordHeader << '\n';
  for (const TrialRecord& r : records) {
    for (const Observation& o : r.observations) {
      out << to_string(r.mode) << ',' << r.n << ',' << r.m << ',';
      if (r.mode == SweepMode::tensor) {
        out << r.k << ",1,";
      } else {
        out << ",,";
      }
      out << format_double(r.lambda) << ',' << r.trial << ',' << r.seed << ',' << format_double(o.s1_hat)
          << ',' << format_double(o.beta_hat) << ',' << format_double(o.overlap_left) << ','
          << format_double(o.overlap_right) << ',';
      if (r.mode == SweepMode::tensor) out << (o.axis + 1);
      out << ',' << format_double(r.predicted.outlier) << ',' << format_double(r.predicted.left_overlap) << ','
          << format_double(r.predicted.right_overlap) << ',' << (o.converged ? "ok" : "nonconverged") << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << '\n';
  for (const AggregateRow& r : rows) {
    out << to_string(r.mode) << ',' << r.n << ',' << r.m << ',';
    if (r.mode == SweepMode::tensor) out << r.k;
    out << ',' << format_double(r.lambda) << ',' << format_double(r.beta) << ',' << r.trials << ','
        << r.failures;
    write_stat(out, r.s1_hat);
    write_stat(out, r.beta_hat);
    write_stat(out, r.overlap_left);
    write_stat(out, r.overlap_right);
    const char* status = r.all_failed() ? "all_failed" : (r.failures > 0 ? "partial" : "ok");
    out << ',' << format_double(r.predicted.outlier) << ',' << format_double(r.predicted.left_overlap) << ','
        << format_double(r.predicted.right_overlap) << ',' << status << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_center,density,theory\n";
  for (std::size_t b = 0; b < h.centers.size(); ++b) {
    out << format_double(h.centers[b]) << ',' << format_double(h.density[b]) << ','
        << format_double(h.theory[b]) << '\n';
  }
}

SweepConfig sweep_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("sweep config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("sweep config: top level must be an object");
  static const char* const known[] = {"mode",        "n",           "m",          "k",         "lambda_grid",
                                      "trials",      "base_seed",   "noise_kind", "signal_kind",
                                      "signals",     "output_path", "jobs",       "memory_cap",
                                      "power_tol",   "power_max_iter"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw std::invalid_argument("sweep config: unknown key '" + item.key() + "'");
  }

  SweepConfig c;
  try {
    c.mode = parse_sweep_mode(get_or<std::string>(j, "mode", "matrix"));
    c.n = get_or<std::size_t>(j, "n", c.n);
    c.m = get_or<std::size_t>(j, "m", c.m);
    c.k = get_or<std::size_t>(j, "k", c.k);
    c.lambda_grid = get_or<std::vector<double>>(j, "lambda_grid", {});
    c.trials = get_or<std::size_t>(j, "trials", c.trials);
    c.base_seed = get_or<std::uint64_t>(j, "base_seed", c.base_seed);
    c.noise_kind = parse_noise_kind(get_or<std::string>(j, "noise_kind", "gaussian"));
    c.signal_kind = parse_signal_kind(get_or<std::string>(j, "signal_kind", "gaussian-unit"));
    c.signals = get_or<std::vector<Vector>>(j, "signals", {});
    c.output_path = get_or<std::string>(j, "output_path", c.output_path);
    c.jobs = get_or<std::size_t>(j, "jobs", c.jobs);
    c.memory_cap = get_or<std::size_t>(j, "memory_cap", c.memory_cap);
    c.power_tol = get_or<double>(j, "power_tol", c.power_tol);
    c.power_max_iter = get_or<std::size_t>(j, "power_max_iter", c.power_max_iter);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string sweep_config_to_json(const SweepConfig& c) {
  json j;
  j["mode"] = std::string(to_string(c.mode));
  j["n"] = c.n;
  if (c.mode == SweepMode::matrix) {
    j["m"] = c.m;
  } else {
    j["k"] = c.k;
  }
  j["lambda_grid"] = c.lambda_grid;
  j["trials"] = c.trials;
  j["base_seed"] = c.base_seed;
  j["noise_kind"] = std::string(to_string(c.noise_kind));
  j["signal_kind"] = std::string(to_string(c.signal_kind));
  if (c.signal_kind == SignalKind::given) j["signals"] = c.signals;
  j["output_path"] = c.output_path;
  j["jobs"] = c.jobs;
  j["memory_cap"] = c.memory_cap;
  j["power_tol"] = c.power_tol;
  j["power_max_iter"] = c.power_max_iter;
  return j.dump(2);
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return sweep_config_from_json(text.str());
}

}  // namespace spiked
