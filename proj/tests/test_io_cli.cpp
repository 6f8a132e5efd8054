#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "amm/distributions.hpp"
#include "amm/io.hpp"
#include "amm/rng.hpp"
#include "amm/sweep.hpp"

using namespace amm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("amm_test_" + std::to_string(Rng(::getpid()).next_u64() % 1000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AMM_CLI_PATH) + " " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_SUITE_BEGIN("io_cli");

TEST_CASE("distribution JSON round trip") {
  TempDir tmp;
  AtomicDistribution d;
  d.dim = 2;
  d.atoms.resize(2, 2);
  d.atoms << 0.123456789012345, -1.0, 2.0, 0.5;
  d.weights.resize(2);
  d.weights << 0.25, 0.75;
  const auto path = tmp.file("dist.json");
  io::write_distribution(d, path);
  const auto back = io::read_distribution(path);
  CHECK(back.dim == 2);
  CHECK((back.atoms - d.atoms).norm() == 0.0);
  CHECK((back.weights - d.weights).norm() == 0.0);
}

TEST_CASE("dataset CSV round trip is lossless") {
  TempDir tmp;
  const auto d = AtomicDistribution::from_1d({-0.7, 0.7}, {0.5, 0.5});
  const auto data = sample_mixture(d, {0.0, 0.5, 1.0, 2.5}, 91);
  const auto path = tmp.file("data.csv");
  io::write_dataset(data, path);
  const auto back = io::read_dataset(path);
  CHECK(back.n() == data.n());
  CHECK((back.points - data.points).norm() == 0.0);
  CHECK((back.sigmas - data.sigmas).norm() == 0.0);

  const std::string text = slurp(path);
  CHECK(text.substr(0, 9) == "sigma,x0\n");
}

TEST_CASE("malformed inputs are rejected") {
  TempDir tmp;
  {
    const auto path = tmp.file("bad_weights.json");
    std::ofstream(path) << "{\"dim\": 1, \"atoms\": [[0.0], [1.0]], "
                           "\"weights\": [0.5, 0.6]}";
    CHECK_THROWS_AS(io::read_distribution(path), InvalidArgument);
  }
  {
    const auto path = tmp.file("bad_atom_dim.json");
    std::ofstream(path) << "{\"dim\": 2, \"atoms\": [[0.0]], "
                           "\"weights\": [1.0]}";
    CHECK_THROWS_AS(io::read_distribution(path), InvalidArgument);
  }
  {
    const auto path = tmp.file("ragged.csv");
    std::ofstream(path) << "sigma,x0,x1\n1.0,0.5\n";
    CHECK_THROWS_AS(io::read_dataset(path), Error);
  }
  {
    const auto path = tmp.file("no_sigma.csv");
    std::ofstream(path) << "x0,x1\n1.0,0.5\n";
    CHECK_THROWS_AS(io::read_dataset(path), Error);
  }
  CHECK_THROWS_AS(io::read_dataset(tmp.file("missing.csv")), Error);
}

TEST_CASE("pricing table CSV parsing") {
  TempDir tmp;
  const auto path = tmp.file("table.csv");
  std::ofstream(path) << "dataset,p_clean,sigma,score\n"
                      << "cifar,0.9,,2.07\n"
                      << "cifar,0.3,0.2,2.42\n"
                      << "celeba,1.0,,2.40\n";
  const auto tables = io::read_pricing_tables(path);
  REQUIRE(tables.size() == 2);
  CHECK(tables[0].dataset == "cifar");
  CHECK(tables[0].rows.size() == 2);
  CHECK(!tables[0].rows[0].sigma.has_value());
  CHECK(tables[0].rows[1].sigma == doctest::Approx(0.2));
  CHECK(tables[1].dataset == "celeba");
}

TEST_CASE("sweep CSV round trip") {
  TempDir tmp;
  SweepResult r;
  r.rows.push_back({100, 0.1, 3.0, 0, 42, 0.25, 90.0, 85.0, 12.5, ""});
  r.rows.push_back({1000, 0.1, 3.0, 1, 43,
                    std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 1.0,
                    "boom"});
  const auto path = tmp.file("sweep.csv");
  write_sweep_csv(r, path);
  const auto back = read_sweep_csv(path);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].n == 100);
  CHECK(back.rows[0].w1_error == 0.25);
  CHECK(back.rows[1].error == "boom");
  CHECK(std::isnan(back.rows[1].w1_error));
}

TEST_CASE("fit_rate on planted sweeps") {
  SweepResult r;
  for (long long n : {1000, 10000, 100000, 1000000}) {
    for (int t = 0; t < 3; ++t) {
      SweepRow row;
      row.n = n;
      row.trial = t;
      row.w1_error = std::pow(double(n), -0.5);
      r.rows.push_back(row);
    }
  }
  const auto [slope, intercept] = fit_rate(r);
  CHECK(slope == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  SweepResult flat;
  for (long long n : {100, 1000, 10000}) {
    SweepRow row;
    row.n = n;
    row.w1_error = 0.37;
    flat.rows.push_back(row);
  }
  CHECK(fit_rate(flat).first == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  SweepResult few;
  few.rows.push_back({100, 0, 0, 0, 0, 0.1, 0, 0, 0, ""});
  few.rows.push_back({200, 0, 0, 0, 0, 0.05, 0, 0, 0, ""});
  CHECK_THROWS_AS(fit_rate(few), InvalidArgument);
}

TEST_CASE("loss trace CSV format") {
  TempDir tmp;
  const auto path = tmp.file("trace.csv");
  io::write_loss_trace({1.5, 1.25, 1.0}, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("iter,loss\n0,1.5\n1,1.25\n2,1\n", 0) == 0);
}

TEST_CASE("cli gen/estimate1d round trip") {
  TempDir tmp;
  const auto dist_path = tmp.file("dist.json");
  io::write_distribution(AtomicDistribution::from_1d({-0.8, 0.8}, {0.5, 0.5}),
                         dist_path);
  const auto data_path = tmp.file("data.csv");
  REQUIRE(run_cli("gen --dist " + dist_path + " --n 20000 --sigma 1.0 --seed 5 --out " +
                  data_path) == 0);
  const auto est_path = tmp.file("est.json");
  REQUIRE(run_cli("estimate1d --data " + data_path + " --k 2 --seed 5 --out " +
                  est_path + " --report " + tmp.file("report.json")) == 0);
  const auto est = io::read_distribution(est_path);
  CHECK(est.dim == 1);
  CHECK(wasserstein1_1d(AtomicDistribution::from_1d({-0.8, 0.8}, {0.5, 0.5}),
                        est) < 0.25);

  const std::string report = slurp(tmp.file("report.json"));
  CHECK(report.find("\"n_d\"") != std::string::npos);
  CHECK(report.find("\"n_l\"") != std::string::npos);
  CHECK(report.find("\"subspace\"") != std::string::npos);
  CHECK(report.find("\"w1_residuals\"") != std::string::npos);
}

TEST_CASE("cli determinism: identical seeds give identical bytes") {
  TempDir tmp;
  const auto dist_path = tmp.file("dist.json");
  io::write_distribution(AtomicDistribution::from_1d({-0.5, 0.5}, {0.4, 0.6}),
                         dist_path);
  const auto a = tmp.file("a.csv");
  const auto b = tmp.file("b.csv");
  REQUIRE(run_cli("gen --dist " + dist_path +
                  " --n 500 --sigma 2.0 --clean-fraction 0.2 --seed 9 --out " +
                  a) == 0);
  REQUIRE(run_cli("gen --dist " + dist_path +
                  " --n 500 --sigma 2.0 --clean-fraction 0.2 --seed 9 --out " +
                  b) == 0);
  CHECK(slurp(a) == slurp(b));

  const auto s1 = tmp.file("s1.csv");
  const auto s2 = tmp.file("s2.csv");
  REQUIRE(run_cli("sample --dist " + dist_path +
                  " --n 50 --steps 32 --seed 3 --out " + s1) == 0);
  REQUIRE(run_cli("sample --dist " + dist_path +
                  " --n 50 --steps 32 --seed 3 --out " + s2) == 0);
  CHECK(slurp(s1) == slurp(s2));
  CHECK(slurp(s1).substr(0, 3) == "x0\n");
}

TEST_CASE("cli sample truncation flag") {
  TempDir tmp;
  const auto dist_path = tmp.file("dist.json");
  io::write_distribution(AtomicDistribution::from_1d({-1.0, 1.0}, {0.5, 0.5}),
                         dist_path);
  const auto out = tmp.file("trunc.csv");
  REQUIRE(run_cli("sample --dist " + dist_path +
                  " --n 200 --steps 64 --truncate-at 0.2 --seed 4 --out " +
                  out) == 0);
  // Truncated samples concentrate near the atoms.
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  int near = 0, total = 0;
  while (std::getline(in, line)) {
    const double x = std::stod(line);
    near += std::abs(std::abs(x) - 1.0) < 0.5;
    ++total;
  }
  CHECK(total == 200);
  CHECK(near > 180);
}

TEST_CASE("cli price on the worked example") {
  TempDir tmp;
  const auto table = tmp.file("table.csv");
  std::ofstream(table) << "dataset,p_clean,sigma,score\n"
                       << "cifar,0.9,,2.07\n"
                       << "cifar,0.3,0.2,2.42\n";
  const auto out = tmp.file("bounds.json");
  REQUIRE(run_cli("price --table " + table + " --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"sigma\": 0.2") != std::string::npos);
  CHECK(text.find("\"inv_c_lower\": 1.16666666666666") != std::string::npos);
}

TEST_CASE("cli sweep smoke and determinism") {
  TempDir tmp;
  const auto dist_path = tmp.file("dist.json");
  io::write_distribution(AtomicDistribution::from_1d({0.5}, {1.0}), dist_path);
  const auto spec_path = tmp.file("spec.json");
  std::ofstream(spec_path)
      << "{\"dist\": \"" << dist_path
      << "\", \"k\": 1, \"sigma\": 1.0, \"n_values\": [100], \"trials\": 1, "
         "\"seed\": 2}";
  const auto out1 = tmp.file("sweep1.csv");
  const auto out2 = tmp.file("sweep2.csv");
  REQUIRE(run_cli("sweep --spec " + spec_path + " --out " + out1 +
                  " --emit-svg") == 0);
  REQUIRE(run_cli("sweep --spec " + spec_path + " --out " + out2) == 0);

  const auto r1 = read_sweep_csv(out1);
  const auto r2 = read_sweep_csv(out2);
  REQUIRE(r1.rows.size() == 1);
  CHECK(r1.rows[0].error.empty());
  CHECK(std::isfinite(r1.rows[0].w1_error));
  // Byte-identical up to the wall-clock column.
  CHECK(r1.rows[0].w1_error == r2.rows[0].w1_error);
  CHECK(r1.rows[0].seed == r2.rows[0].seed);
  CHECK(fs::exists(tmp.file("sweep1.svg")));
}

TEST_CASE("cli lemma1-check exits zero") {
  REQUIRE(run_cli("lemma1-check --trials 50 --seed 1") == 0);
}

TEST_CASE("config file provides a seed when flag and env are absent") {
  TempDir tmp;
  const auto dist_path = tmp.file("dist.json");
  io::write_distribution(AtomicDistribution::from_1d({0.0}, {1.0}), dist_path);
  const auto cfg_path = tmp.file("cfg.json");
  std::ofstream(cfg_path) << "{\"seed\": 123}";
  const auto a = tmp.file("a.csv");
  const auto b = tmp.file("b.csv");
  REQUIRE(run_cli("gen --dist " + dist_path + " --n 10 --sigma 1 --config " +
                  cfg_path + " --out " + a) == 0);
  REQUIRE(run_cli("gen --dist " + dist_path + " --n 10 --sigma 1 --seed 123 --out " +
                  b) == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("env seed is honored when no flag is given") {
  TempDir tmp;
  const auto dist_path = tmp.file("dist.json");
  io::write_distribution(AtomicDistribution::from_1d({0.0}, {1.0}), dist_path);
  const auto a = tmp.file("a.csv");
  const auto b = tmp.file("b.csv");
  const std::string base = std::string(AMM_CLI_PATH);
  REQUIRE(std::system(("AMBIENT_MOMENTS_SEED=77 " + base + " gen --dist " +
                       dist_path + " --n 10 --sigma 1 --out " + a +
                       " 2>/dev/null")
                          .c_str()) == 0);
  REQUIRE(std::system(("AMBIENT_MOMENTS_SEED=77 " + base + " gen --dist " +
                       dist_path + " --n 10 --sigma 1 --out " + b +
                       " 2>/dev/null")
                          .c_str()) == 0);
  CHECK(slurp(a) == slurp(b));
  // A flag overrides the environment.
  const auto c = tmp.file("c.csv");
  REQUIRE(std::system(("AMBIENT_MOMENTS_SEED=77 " + base + " gen --dist " +
                       dist_path + " --n 10 --sigma 1 --seed 78 --out " + c +
                       " 2>/dev/null")
                          .c_str()) == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_SUITE_END();
