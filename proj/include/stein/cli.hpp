#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stein/optim.hpp"

namespace stein::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerification = 1,
  kExitUsage = 2,
  kExitPremise = 3,
  kExitCertificate = 4,
  kExitDimensionCap = 5,
};

struct ExperimentConfig {
  std::string family = "diagonal";
  std::string state = "coherence:0.8";
  std::vector<double> y_grid;
  std::vector<Index> N_grid;
  std::optional<double> y;
  std::optional<Index> N;
  double K = 4.0;
  double epsilon = 1e-4;
  Index sandwich_N = 3;
  SolverSettings solver;
  std::string out;
};

// key = value lines; '#' starts a comment.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

// coherence:<p> | bell | classical:<p> | <operator file>
Density make_state(const std::string& spec);
// diagonal | full | iid:mixed | iid:<operator file> | sep:<dA>x<dB>
FreeFamily make_family(const std::string& spec, const Density& single_copy, Index copies, int restarts = 32);

struct ExponentRow {
  Index N = 0;
  double y = 0;
  double e = 0;
  double gap = 0;
};

// Rows in grid order (N outer, y inner); each point solved independently.
std::vector<ExponentRow> exponent_curve(const Density& rho, const std::string& family, const std::vector<Index>& N_grid,
                                        const std::vector<double>& y_grid, const SolverSettings& s, int threads);

struct MonotonicityViolation {
  Index N = 0;
  double y_lo = 0, y_hi = 0;
  double excess = 0;
};

// e_N non-increasing in y, up to the certified gaps of both points.
std::vector<MonotonicityViolation> check_monotone(const std::vector<ExponentRow>& rows, double slack = 1e-9);

void write_exponent_csv(std::ostream& os, const std::vector<ExponentRow>& rows);
void write_gnuplot(std::ostream& os, const std::string& csv_path, const std::vector<Index>& N_grid);

struct VerifyRow {
  std::string suite;
  std::string check;
  int trial = 0;
  double margin = 0;
  double tolerance = 0;
  bool pass = true;
  std::string detail;  // error text when the trial threw
};

std::vector<std::string> verify_suites();
std::vector<std::string> verify_checks(const std::string& suite);
// Unknown suite names throw DomainViolation. tol, when set, replaces every per-check tolerance.
std::vector<VerifyRow> run_verify_suite(const std::string& suite, int trials, std::uint64_t seed,
                                        std::optional<double> tol = std::nullopt);
std::vector<VerifyRow> run_verify_check(const std::string& suite, const std::string& check, int trials,
                                        std::uint64_t seed, std::optional<double> tol = std::nullopt);
void write_verify_csv(std::ostream& os, const std::vector<VerifyRow>& rows);

struct PipelineOptions {
  bool expect_premise_fail = false;
  std::string out_dir;
};

// Returns an ExitCode; the trace directory is written even on failure.
int run_pipeline(const ExperimentConfig& c, double y, Index N, const PipelineOptions& opt, std::ostream& log);

int main(int argc, char** argv);

}  // namespace stein::cli
