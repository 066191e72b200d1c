#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stein/cli.hpp"
#include "stein/entropy.hpp"

using namespace stein;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "steincli");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("steincli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double exact_classical(Index N, double y) {
  // min over the single free state of Tr[(rho^N - 2^{yN} (I/2)^N)_+], rho = diag(.75,.25)
  const double b = std::exp2(y * static_cast<double>(N)) / std::exp2(static_cast<double>(N));
  double total = 0, binom = 1;
  for (Index k = 0; k <= N; ++k) {
    const double p = std::pow(0.75, static_cast<double>(N - k)) * std::pow(0.25, static_cast<double>(k));
    total += binom * std::max(0.0, p - b);
    binom = binom * static_cast<double>(N - k) / static_cast<double>(k + 1);
  }
  return total;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream is(
      "# comment\n"
      "family = iid:mixed\n"
      "state = classical:0.75\n"
      "y_grid = 0.1:0.1:0.3\n"
      "N_grid = 2, 4\n"
      "K = 8\n"
      "tol = 1e-8   # trailing\n");
  const cli::ExperimentConfig c = cli::parse_config(is);
  CHECK(c.family == "iid:mixed");
  REQUIRE(c.y_grid.size() == 3);
  CHECK(c.y_grid[2] == doctest::Approx(0.3));
  CHECK(c.N_grid == std::vector<Index>{2, 4});
  CHECK(c.K == 8.0);
  CHECK(c.solver.tol == 1e-8);

  std::istringstream bad("colour = red\n");
  CHECK_THROWS_AS(cli::parse_config(bad), Error);
  std::istringstream bad2("K = eight\n");
  CHECK_THROWS_AS(cli::parse_config(bad2), Error);
}

TEST_CASE("states and families") {
  CHECK(cli::make_state("bell").dim() == 4);
  CHECK(cli::make_state("coherence:0.8").matrix()(0, 0).real() == doctest::Approx(0.8));
  CHECK_THROWS_AS(cli::make_state("coherence:2"), Error);
  const Density b = cli::make_state("bell");
  CHECK(cli::make_family("sep:2x2", b, 1).kind() == FamilyKind::SeparableHull);
  CHECK_THROWS_AS(cli::make_family("sep:2x3", b, 1), Error);
  CHECK_THROWS_AS(cli::make_family("nonsense", b, 1), Error);
}

TEST_CASE("exponent curve, classical case") {
  SolverSettings s;
  const Density rho = cli::make_state("classical:0.75");
  const auto rows = cli::exponent_curve(rho, "iid:mixed", {2, 6, 10}, {0.1, 0.3}, s, 1);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) CHECK(r.e == doctest::Approx(exact_classical(r.N, r.y)).epsilon(1e-6).scale(1.0));
  // below the divergence the value grows with N, above it shrinks
  CHECK(rows[4].e > rows[0].e);
  CHECK(rows[5].e < rows[1].e);
  CHECK(cli::check_monotone(rows).empty());

  const auto zero = cli::exponent_curve(cli::make_state("classical:0.5"), "iid:mixed", {3}, {0.2}, s, 1);
  CHECK(zero[0].e < 1e-12);
}

TEST_CASE("monotonicity check flags increases") {
  std::vector<cli::ExponentRow> rows = {{2, 0.1, 0.5, 0}, {2, 0.2, 0.6, 0}};
  CHECK(cli::check_monotone(rows).size() == 1);
  rows[1].gap = 0.2;
  CHECK(cli::check_monotone(rows).empty());
}

TEST_CASE("verify command") {
  const fs::path dir = scratch("verify");
  const std::string out = (dir / "entropy.csv").string();
  CHECK(run({"verify", "--suite", "entropy", "--trials", "100", "--seed", "7", "--out", out}) == cli::kExitOk);
  std::ifstream f(out);
  std::string line;
  int rows = 0;
  std::getline(f, line);
  CHECK(line.rfind("suite,check,trial,margin,tolerance,pass", 0) == 0);
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 100 * static_cast<int>(cli::verify_checks("entropy").size()));

  CHECK(run({"verify", "--suite", "opalg", "--trials", "500"}) == cli::kExitOk);
  CHECK(run({"verify", "--suite", "entropy", "--tol", "-1"}) == cli::kExitUsage);
  CHECK(run({"verify", "--suite", "nope"}) == cli::kExitUsage);
  CHECK(run({"frobnicate"}) == cli::kExitUsage);
}

TEST_CASE("verify rows are reproducible") {
  const auto a = cli::run_verify_suite("symmetry", 5, 11);
  const auto b = cli::run_verify_suite("symmetry", 5, 11);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].margin == b[k].margin);
}

TEST_CASE("pipeline command") {
  cli::ExperimentConfig c;
  c.family = "diagonal";
  c.state = "coherence:0.8";
  c.sandwich_N = 2;
  std::ostringstream log;
  const fs::path dir = scratch("pipeline");
  CHECK(cli::run_pipeline(c, binary_entropy(0.8), 6, {false, dir.string()}, log) == cli::kExitOk);
  CHECK(fs::exists(dir / "certificates.csv"));
  CHECK(cli::run_pipeline(c, 5.0, 6, {}, log) == cli::kExitPremise);
  CHECK(cli::run_pipeline(c, 5.0, 6, {true, ""}, log) == cli::kExitOk);

  cli::ExperimentConfig free_cfg = c;
  free_cfg.state = "classical:0.6";
  CHECK(cli::run_pipeline(free_cfg, 0.5, 4, {}, log) == cli::kExitPremise);
}

TEST_CASE("exponent command writes csv and gnuplot") {
  const fs::path dir = scratch("exponent");
  const fs::path cfg = dir / "c.cfg";
  std::ofstream(cfg) << "family = iid:mixed\nstate = classical:0.75\ny_grid = 0.1, 0.3\nN_grid = 2, 4\n";
  const std::string out = (dir / "e.csv").string();
  CHECK(run({"exponent", "--config", cfg.string(), "--out", out, "--gnuplot"}) == cli::kExitOk);
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  CHECK(header == "N,y,e,gap");
  CHECK(fs::exists(out + ".gp"));
  CHECK(run({"exponent", "--config", (dir / "missing.cfg").string()}) == cli::kExitUsage);
}
