#include "spiked/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "spiked/bbp.hpp"
#include "spiked/errors.hpp"
#include "spiked/harness.hpp"
#include "spiked/linalg.hpp"
#include "spiked/mp_law.hpp"
#include "spiked/random.hpp"
#include "spiked/svg_plot.hpp"
#include "spiked/tensor.hpp"

namespace spiked {

namespace {

namespace fs = std::filesystem;

constexpr const char* kFooter =
    "Exit codes:\n"
    "  0  success\n"
    "  1  one or more trials failed (non-convergence or oracle mismatch)\n"
    "  2  usage, configuration or I/O error\n"
    "  3  indeterminate oracle check (some trials found an outlier, some did not)\n"
    "\n"
    "Environment:\n"
    "  SPIKED_UNFOLD_MEM_CAP  maximum number of tensor entries (default 2e8)";

/// Error that maps to exit code 2 with its message.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p, ec)) throw UsageError("cannot create output directory: " + dir);
  return p;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("cannot write " + path.string());
}

std::vector<double> dense_grid(double lo, double hi, std::size_t points) {
  if (!(hi > lo)) return {lo};
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

std::size_t apply_memory_cap_override(std::size_t configured) {
  const char* raw = std::getenv("SPIKED_UNFOLD_MEM_CAP");
  if (raw == nullptr || *raw == '\0') return configured;
  return memory_cap_from_env();
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
  double lambda = 0.0;
  std::optional<double> phi;
  std::optional<std::size_t> n, m, k;
  std::size_t q = 1;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  if (a.lambda < 0.0 || !std::isfinite(a.lambda)) throw UsageError("--lambda must be >= 0");
  double phi = 0.0;
  std::optional<double> beta_c;
  if (a.phi) {
    if (a.k || a.m) throw UsageError("--phi cannot be combined with --m or --k");
    phi = *a.phi;
    if (!(phi >= 1.0)) throw UsageError("--phi must be >= 1");
  } else if (a.n && a.k) {
    if (*a.k < 2 || *a.n < 2) throw UsageError("--n and --k must be >= 2");
    if (a.q < 1 || 2 * a.q > *a.k) throw UsageError("--q must satisfy 1 <= q <= k/2");
    phi = unfolding_phi(*a.n, *a.k, a.q);
    beta_c = tensor_critical_beta(*a.n, *a.k);
  } else if (a.n && a.m) {
    if (*a.m < *a.n || *a.n < 1) throw UsageError("--m must be >= --n");
    phi = std::sqrt(static_cast<double>(*a.m) / static_cast<double>(*a.n));
  } else {
    throw UsageError("predict needs --phi, or --n with --m, or --n with --k");
  }
  const BbpPrediction p = predict(a.lambda, phi);
  out << "lambda           " << fmt(a.lambda) << '\n'
      << "phi              " << fmt(phi) << '\n'
      << "critical beta    " << fmt(critical_snr(phi)) << '\n';
  if (beta_c) {
    out << "tensor beta_c    " << fmt(*beta_c) << "  (n^((k-2)/4), n=" << *a.n << ", k=" << *a.k << ", q=" << a.q
        << ")\n";
  }
  out << "beta             " << fmt(a.lambda * std::sqrt(phi)) << '\n'
      << "above threshold  " << (p.above_threshold ? "yes" : "no") << '\n'
      << "outlier          " << fmt(p.outlier) << '\n'
      << "left overlap     " << fmt(p.left_overlap) << '\n'
      << "right overlap    " << fmt(p.right_overlap) << '\n';
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::optional<std::size_t> n, m, k, trials, jobs;
  std::optional<std::uint64_t> seed;
  std::vector<double> lambdas;
  std::string noise;
  std::optional<std::string> out;
  bool plot = false;
};

SweepConfig build_sweep_config(const SweepArgs& a) {
  SweepConfig c;
  if (!a.config.empty()) {
    try {
      c = load_sweep_config(a.config);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  } else {
    if (!a.n) throw UsageError("sweep needs --config or --n");
    if (a.k && a.m) throw UsageError("give either --m (matrix) or --k (tensor)");
    if (!a.k && !a.m) throw UsageError("sweep needs --m (matrix) or --k (tensor)");
    c.mode = a.k ? SweepMode::tensor : SweepMode::matrix;
    if (a.lambdas.empty()) throw UsageError("sweep needs --lambda");
  }
  if (a.n) c.n = *a.n;
  if (a.m) c.m = *a.m;
  if (a.k) c.k = *a.k;
  if (!a.lambdas.empty()) c.lambda_grid = a.lambdas;
  if (a.trials) c.trials = *a.trials;
  if (a.seed) c.base_seed = *a.seed;
  if (a.jobs) c.jobs = *a.jobs;
  if (!a.noise.empty()) c.noise_kind = parse_noise_kind(a.noise);
  if (a.out) c.output_path = *a.out;
  c.memory_cap = apply_memory_cap_override(c.memory_cap);
  c.validate();
  return c;
}

std::string sweep_meta(const SweepConfig& c) {
  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(sweep_config_to_json(c));
  meta["phi"] = c.phi();
  meta["analysed_columns"] = c.analysed_cols();
  meta["overlap_statistic"] = "mean of the absolute overlap |<estimate, signal>| over successful trials";
  if (c.mode == SweepMode::tensor) {
    meta["tensor_aggregation"] = "each trial contributes the mean over its k axes before averaging over trials";
  }
  meta["standard_error"] = "sample standard deviation (ddof 1) divided by sqrt(successful trials)";
  return meta.dump(2) + "\n";
}

void plot_sweep(const SweepConfig& c, const std::vector<AggregateRow>& rows, const fs::path& dir) {
  const double phi = c.phi();
  std::vector<AggregateRow> ok;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(ok), [](const AggregateRow& r) { return !r.all_failed(); });
  if (ok.empty()) return;
  const std::vector<double> grid = dense_grid(c.lambda_grid.front(), c.lambda_grid.back(), 301);

  auto scatter = [&](const std::string& name, auto field) {
    PlotSeries s{name, {}, SeriesStyle::scatter, {}};
    for (const AggregateRow& r : ok) {
      const Statistic& st = *(r.*field);
      s.points.emplace_back(r.lambda, st.mean);
      s.y_errors.push_back(st.se);
    }
    return s;
  };
  auto theory = [&](const std::string& name, auto value) {
    PlotSeries s{name, {}, SeriesStyle::line, {}};
    for (double l : grid) s.points.emplace_back(l, value(predict(l, phi)));
    return s;
  };

  const std::string suffix = c.mode == SweepMode::tensor
                                 ? " (k=" + std::to_string(c.k) + ", n=" + std::to_string(c.n) + ")"
                                 : " (n=" + std::to_string(c.n) + ", m=" + std::to_string(c.m) + ")";
  PlotSpec s1{"Top singular value" + suffix, "lambda", "s1", {}, (dir / "s1_hat.svg").string()};
  s1.series.push_back(scatter("empirical mean", &AggregateRow::s1_hat));
  s1.series.push_back(theory("prediction", [](const BbpPrediction& p) { return p.outlier; }));
  save_svg(s1);

  PlotSpec ov{"Signal overlaps" + suffix, "lambda", "|overlap|", {}, (dir / "overlap.svg").string()};
  ov.series.push_back(scatter("left, empirical", &AggregateRow::overlap_left));
  ov.series.push_back(theory("left, prediction", [](const BbpPrediction& p) { return p.left_overlap; }));
  ov.series.push_back(scatter("right, empirical", &AggregateRow::overlap_right));
  ov.series.push_back(theory("right, prediction", [](const BbpPrediction& p) { return p.right_overlap; }));
  save_svg(ov);

  PlotSpec bh{"Estimated beta" + suffix, "lambda", "beta", {}, (dir / "beta_hat.svg").string()};
  bh.series.push_back(scatter("empirical mean", &AggregateRow::beta_hat));
  bh.series.push_back(theory("true beta", [&](const BbpPrediction& p) { return c.beta_for(p.lambda); }));
  save_svg(bh);
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const SweepConfig c = build_sweep_config(a);
  const fs::path dir = prepare_out_dir(c.output_path);
  const std::vector<TrialRecord> records = run_sweep(c);
  const std::vector<AggregateRow> rows = aggregate(records);

  std::ostringstream rec, agg;
  write_records_csv(rec, records);
  write_aggregate_csv(agg, rows);
  write_file(dir / "records.csv", rec.str());
  write_file(dir / "aggregate.csv", agg.str());
  write_file(dir / "sweep_meta.json", sweep_meta(c));
  if (a.plot) plot_sweep(c, rows, dir);

  std::size_t failures = 0;
  for (const AggregateRow& r : rows) failures += r.failures;
  out << "mode " << to_string(c.mode) << ", phi " << fmt(c.phi()) << ", " << records.size() << " trials, "
      << failures << " failed\n";
  out << "lambda  s1_hat_mean  pred_outlier  overlap_left_mean  pred_overlap_left\n";
  for (const AggregateRow& r : rows) {
    out << fmt(r.lambda, "%-7.4g") << ' ';
    if (r.all_failed()) {
      out << "(all trials failed)\n";
      continue;
    }
    out << fmt(r.s1_hat->mean, "%-12.6f") << ' ' << fmt(r.predicted.outlier, "%-13.6f") << ' '
        << fmt(r.overlap_left->mean, "%-18.6f") << ' ' << fmt(r.predicted.left_overlap, "%.6f") << '\n';
  }
  out << "wrote " << (dir / "records.csv").string() << ", " << (dir / "aggregate.csv").string() << '\n';
  return failures > 0 ? kExitTrialFailures : kExitOk;
}

// ---- oracle-check ----------------------------------------------------------

struct OracleArgs {
  std::size_t n = 50;
  std::size_t m = 200;
  double lambda = 2.0;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  bool zero_noise = false;
};

int cmd_oracle_check(const OracleArgs& a, std::ostream& out) {
  if (a.n < 1 || a.m < a.n) throw UsageError("oracle-check needs 1 <= n <= m");
  if (a.n > kDenseSolverLimit) throw UsageError("--n exceeds the dense solver limit");
  if (!(a.lambda > 0.0)) throw UsageError("--lambda must be > 0");
  if (a.trials < 1) throw UsageError("--trials must be >= 1");
  const double phi = std::sqrt(static_cast<double>(a.m) / static_cast<double>(a.n));
  const double beta = a.lambda * std::sqrt(phi);
  constexpr double kMatchTol = 1e-8;
  // a genuine outlier this far above the bulk edge must not be missed
  const double miss_level = phi + 1.0 + 0.2;

  std::size_t pass = 0, fail = 0, none = 0;
  out << "oracle check: n=" << a.n << " m=" << a.m << " phi=" << fmt(phi) << " lambda=" << fmt(a.lambda)
      << " beta=" << fmt(beta) << (a.zero_noise ? " (zero noise)" : "") << '\n';
  for (std::size_t t = 0; t < a.trials; ++t) {
    Rng rng(derive_seed(a.seed, 0, t));
    const Vector v = random_unit_vector(rng, a.n);
    const Vector u = random_unit_vector(rng, a.m);
    DenseMatrix z(a.n, a.m);
    if (!a.zero_noise) fill_noise(rng, NoiseKind::gaussian, 1.0 / static_cast<double>(a.n), z.entries());
    DenseMatrix x = z;
    x.add_outer(beta, v, u);
    const double dense_top = full_singular_values(x).front();
    const std::optional<double> root = master_equation_root(z, v, u, beta);

    out << "trial " << t << ": ";
    if (root) {
      const double gap = std::abs(*root - dense_top);
      const bool ok = gap <= kMatchTol;
      (ok ? pass : fail) += 1;
      out << "x*=" << fmt(*root, "%.12f") << " dense=" << fmt(dense_top, "%.12f") << " |diff|=" << fmt(gap, "%.3e")
          << (ok ? " pass" : " FAIL") << '\n';
    } else if (!a.zero_noise && dense_top > miss_level) {
      ++fail;
      out << "no root, but dense top " << fmt(dense_top, "%.12f") << " exceeds phi+1+0.2 FAIL\n";
    } else {
      ++none;
      out << "no outlier (dense top " << fmt(dense_top, "%.12f") << ")\n";
    }
  }
  out << "summary: " << pass << " pass, " << fail << " fail, " << none << " no outlier\n";
  if (fail > 0) return kExitTrialFailures;
  if (pass == a.trials || none == a.trials) return kExitOk;
  out << "indeterminate: mixed outlier / no-outlier outcomes\n";
  return kExitIndeterminate;
}

// ---- density ---------------------------------------------------------------

struct DensityArgs {
  std::size_t n = 400;
  std::size_t m = 400;
  std::uint64_t seed = 0;
  std::size_t bins = 60;
  std::string out = ".";
};

int cmd_density(const DensityArgs& a, std::ostream& out) {
  if (a.n < 1 || a.m < a.n) throw UsageError("density needs 1 <= n <= m");
  if (a.n > kDenseSolverLimit) throw UsageError("--n exceeds the dense solver limit");
  if (a.bins < 1) throw UsageError("--bins must be >= 1");
  const fs::path dir = prepare_out_dir(a.out);
  const Histogram h = spectrum_histogram(a.n, a.m, a.seed, a.bins);

  std::ostringstream csv;
  write_histogram_csv(csv, h);
  write_file(dir / "density.csv", csv.str());

  PlotSpec spec{"Singular values of Z (n=" + std::to_string(a.n) + ", m=" + std::to_string(a.m) + ")",
                "singular value", "density", {}, (dir / "density.svg").string()};
  PlotSeries emp{"empirical", {}, SeriesStyle::scatter, {}};
  for (std::size_t b = 0; b < h.centers.size(); ++b) emp.points.emplace_back(h.centers[b], h.density[b]);
  const MpLaw law(h.phi);
  PlotSeries th{"limiting density", {}, SeriesStyle::line, {}};
  const auto [lo, hi] = law.singular_edges();
  for (double x : dense_grid(std::max(lo, 0.0), hi, 401)) th.points.emplace_back(x, singular_density(law, x));
  spec.series = {emp, th};
  save_svg(spec);

  double mass = 0.0;
  for (double d : h.density) mass += d * h.bin_width;
  out << "phi " << fmt(h.phi) << ", bins " << a.bins << ", histogram mass " << fmt(mass, "%.15f") << '\n'
      << "s1 " << fmt(h.singular_values.front()) << " (edge " << fmt(h.phi + 1.0) << ")\n"
      << "wrote " << (dir / "density.csv").string() << ", " << (dir / "density.svg").string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiked matrix and tensor PCA: BBP predictions, Monte Carlo sweeps and oracle checks",
               "spiked-unfold"};
  app.footer(kFooter);
  app.require_subcommand(1);

  PredictArgs pa;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Evaluate the BBP predictions at one signal strength");
  predict_cmd->add_option("--lambda", pa.lambda, "Signal-to-noise ratio lambda = beta / sqrt(phi)")->required();
  predict_cmd->add_option("--phi", pa.phi, "Aspect parameter sqrt(m/n) >= 1");
  predict_cmd->add_option("--n", pa.n, "Rows (matrix) or tensor dimension");
  predict_cmd->add_option("--m", pa.m, "Columns (matrix form)");
  predict_cmd->add_option("--k", pa.k, "Tensor order (tensor form)");
  predict_cmd->add_option("--q", pa.q, "Number of row axes of the unfolding (tensor form)")->capture_default_str();

  SweepArgs sa;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a seeded Monte Carlo sweep and write CSV (and SVG) output");
  sweep_cmd->add_option("--config", sa.config, "JSON sweep configuration")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--n", sa.n, "Rows (matrix) or tensor dimension");
  sweep_cmd->add_option("--m", sa.m, "Columns (matrix mode)");
  sweep_cmd->add_option("--k", sa.k, "Tensor order (tensor mode)");
  sweep_cmd->add_option("--lambda", sa.lambdas, "Comma-separated ascending lambda grid")->delimiter(',');
  sweep_cmd->add_option("--trials", sa.trials, "Trials per lambda");
  sweep_cmd->add_option("--seed", sa.seed, "Base seed");
  sweep_cmd->add_option("--jobs", sa.jobs, "Worker threads");
  sweep_cmd->add_option("--noise", sa.noise, "Noise distribution: gaussian or rademacher");
  sweep_cmd->add_option("--out", sa.out, "Output directory (overrides output_path)");
  sweep_cmd->add_flag("--plot", sa.plot, "Also write SVG plots");

  OracleArgs oa;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle-check", "Compare the master-equation root with a dense SVD on seeded samples");
  oracle_cmd->add_option("--n", oa.n, "Rows")->capture_default_str();
  oracle_cmd->add_option("--m", oa.m, "Columns")->capture_default_str();
  oracle_cmd->add_option("--lambda", oa.lambda, "Signal-to-noise ratio")->capture_default_str();
  oracle_cmd->add_option("--trials", oa.trials, "Number of samples")->capture_default_str();
  oracle_cmd->add_option("--seed", oa.seed, "Base seed")->capture_default_str();
  oracle_cmd->add_flag("--zero-noise", oa.zero_noise, "Use Z = 0, where the root is exactly beta");

  DensityArgs da;
  CLI::App* density_cmd =
      app.add_subcommand("density", "Histogram the singular values of one noise matrix against the limiting law");
  density_cmd->add_option("--n", da.n, "Rows")->capture_default_str();
  density_cmd->add_option("--m", da.m, "Columns")->capture_default_str();
  density_cmd->add_option("--seed", da.seed, "Seed")->capture_default_str();
  density_cmd->add_option("--bins", da.bins, "Histogram bins")->capture_default_str();
  density_cmd->add_option("--out", da.out, "Output directory")->capture_default_str();

  std::vector<std::string> argv_storage{"spiked-unfold"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*predict_cmd) return cmd_predict(pa, out);
    if (*sweep_cmd) return cmd_sweep(sa, out);
    if (*oracle_cmd) return cmd_oracle_check(oa, out);
    if (*density_cmd) return cmd_density(da, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace spiked
