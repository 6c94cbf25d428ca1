#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spiked/cli.hpp"
#include "spiked/mp_law.hpp"

using namespace spiked;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spiked_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("predict") {
  const Result r = run({"predict", "--lambda", "2", "--phi", "10"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("outlier          11.97914") != std::string::npos);
  CHECK(r.out.find("critical beta    3.16227766") != std::string::npos);

  const Result edge = run({"predict", "--lambda", "1", "--phi", "10"});
  CHECK(edge.code == kExitOk);
  CHECK(edge.out.find("outlier          11\n") != std::string::npos);
  CHECK(edge.out.find("left overlap     0\n") != std::string::npos);
  CHECK(edge.out.find("right overlap    0\n") != std::string::npos);

  const Result tensor = run({"predict", "--n", "16", "--k", "3", "--lambda", "1"});
  CHECK(tensor.code == kExitOk);
  CHECK(tensor.out.find("tensor beta_c    2 ") != std::string::npos);

  const Result matrix = run({"predict", "--n", "100", "--m", "400", "--lambda", "2"});
  CHECK(matrix.out.find("phi              2\n") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"predict", "--lambda"}).code == kExitUsage);
  CHECK(run({"predict", "--lambda", "abc", "--phi", "2"}).code == kExitUsage);
  CHECK(run({"predict", "--lambda", "2"}).code == kExitUsage);
  CHECK(run({"predict", "--lambda", "2", "--phi", "0.5"}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"sweep", "--n", "10"}).code == kExitUsage);
  CHECK(run({"sweep", "--config", "/nonexistent.json"}).code == kExitUsage);
}

TEST_CASE("help documents the exit codes") {
  const Result r = run({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("Exit codes") != std::string::npos);
  CHECK(r.out.find("SPIKED_UNFOLD_MEM_CAP") != std::string::npos);
}

TEST_CASE("sweep from a config file") {
  const fs::path dir = scratch("sweep");
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"mode": "matrix", "n": 30, "m": 120, "lambda_grid": [2.0], "trials": 2,
                            "base_seed": 5, "output_path": ")"
                     << (dir / "out").string() << "\"}";
  const Result r = run({"sweep", "--config", cfg.string(), "--plot"});
  CHECK(r.code == kExitOk);
  const std::string records = read(dir / "out" / "records.csv");
  const std::string aggregate = read(dir / "out" / "aggregate.csv");
  CHECK(line_count(records) == 1 + 2);
  CHECK(line_count(aggregate) == 1 + 1);
  CHECK(fs::exists(dir / "out" / "s1_hat.svg"));
  CHECK(fs::exists(dir / "out" / "overlap.svg"));
  CHECK(read(dir / "out" / "sweep_meta.json").find("absolute overlap") != std::string::npos);

  const Result again = run({"sweep", "--config", cfg.string(), "--out", (dir / "again").string()});
  CHECK(again.code == kExitOk);
  CHECK(read(dir / "again" / "records.csv") == records);
  CHECK(read(dir / "again" / "aggregate.csv") == aggregate);
  fs::remove_all(dir);
}

TEST_CASE("sweep from flags, tensor mode") {
  const fs::path dir = scratch("tensor");
  const Result r = run({"sweep", "--n", "10", "--k", "3", "--lambda", "0,2", "--trials", "2", "--jobs", "2",
                        "--out", dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(line_count(read(dir / "records.csv")) == 1 + 2 * 2 * 3);
  fs::remove_all(dir);
}

TEST_CASE("sweep failure and I/O exit codes") {
  const fs::path dir = scratch("fail");
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"mode": "matrix", "n": 30, "m": 120, "lambda_grid": [1.0], "trials": 2,
                            "power_max_iter": 1})";
  CHECK(run({"sweep", "--config", cfg.string(), "--out", (dir / "o").string()}).code == kExitTrialFailures);
  CHECK(read(dir / "o" / "records.csv").find("nonconverged") != std::string::npos);

  std::ofstream(dir / "blocker") << "x";
  const Result io = run({"sweep", "--n", "10", "--m", "20", "--lambda", "1", "--out", (dir / "blocker" / "x").string()});
  CHECK(io.code == kExitUsage);
  CHECK(io.err.find("cannot") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("memory cap from the environment") {
  const fs::path dir = scratch("cap");
  setenv("SPIKED_UNFOLD_MEM_CAP", "1000", 1);
  const Result r = run({"sweep", "--n", "20", "--k", "3", "--lambda", "1", "--out", dir.string()});
  unsetenv("SPIKED_UNFOLD_MEM_CAP");
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("memory cap") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("oracle check") {
  const Result pass = run({"oracle-check", "--n", "50", "--m", "200", "--lambda", "2", "--trials", "5"});
  CHECK(pass.code == kExitOk);
  CHECK(pass.out.find("summary: 5 pass, 0 fail, 0 no outlier") != std::string::npos);

  const Result none = run({"oracle-check", "--n", "50", "--m", "200", "--lambda", "0.5", "--trials", "5"});
  CHECK(none.code == kExitOk);
  CHECK(none.out.find("summary: 0 pass, 0 fail, 5 no outlier") != std::string::npos);

  const Result zero = run({"oracle-check", "--lambda", "2", "--trials", "1", "--zero-noise"});
  CHECK(zero.code == kExitOk);
  CHECK(zero.out.find("x*=2.828427124746") != std::string::npos);

  // just above threshold some samples separate and some do not
  const Result mixed = run({"oracle-check", "--n", "50", "--m", "200", "--lambda", "1.15", "--trials", "20"});
  CHECK(mixed.code == kExitIndeterminate);
  CHECK(mixed.out.find("indeterminate") != std::string::npos);
}

TEST_CASE("density") {
  const fs::path dir = scratch("density");
  const Result r = run({"density", "--n", "400", "--m", "400", "--seed", "1", "--bins", "40", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("histogram mass 1.000000000000000") != std::string::npos);
  CHECK(fs::exists(dir / "density.csv"));
  CHECK(fs::exists(dir / "density.svg"));

  const Result one = run({"density", "--n", "20", "--m", "40", "--bins", "1", "--out", dir.string()});
  CHECK(one.code == kExitOk);
  CHECK(line_count(read(dir / "density.csv")) == 2);
  fs::remove_all(dir);
}

TEST_CASE("density with m = n^2: overlay peak at the mode of the limiting law") {
  const fs::path dir = scratch("density_long");
  const Result r = run({"density", "--n", "60", "--m", "3600", "--bins", "30", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  std::istringstream csv(read(dir / "density.csv"));
  std::string line;
  std::getline(csv, line);
  double best_x = 0.0, best = -1.0;
  while (std::getline(csv, line)) {
    const double x = std::stod(line.substr(0, line.find(',')));
    const double theory = std::stod(line.substr(line.rfind(',') + 1));
    if (theory > best) {
      best = theory;
      best_x = x;
    }
  }
  // mode of ρ_φ by a fine scan
  // φ = √(m/n) = √60
  const MpLaw law(std::sqrt(60.0));
  double mode = 0.0, peak = -1.0;
  for (double x = law.phi() - 1.0; x <= law.phi() + 1.0; x += 1e-5) {
    const double d = singular_density(law, x);
    if (d > peak) {
      peak = d;
      mode = x;
    }
  }
  CHECK(std::abs(best_x - mode) <= 0.1);
  fs::remove_all(dir);
}
