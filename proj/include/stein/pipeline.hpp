#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stein/certificate.hpp"
#include "stein/optim.hpp"

namespace stein {

inline constexpr double kPremiseWindow = 1e-4;
inline constexpr double kCertTolerance = 1e-8;

struct Schedule {
  Index N = 0;
  Index M = 0;
  Index R = 0;
};

// M = R = ceil(N^{2/3}), then R lowered until N - M >= 2R.
Schedule mr_schedule(Index N);

struct DominatedState {
  Density state;
  Certificate op_cert;        // state <= X / (1 - Tr Delta)
  Certificate fidelity_cert;  // F(state, rho) >= 1 - Tr Delta
};

// rho <= X + Delta  =>  rho~ = T rho T^dagger / Tr, T = X^{1/2} (X + Delta)^{-1/2}
DominatedState dominated_state(const Density& rho, const Operator& X, const Operator& delta, double tol = kCertTolerance);

double epsilon_n(Index N, Index M, Index R, double y, double mu);

struct PipelineTrace {
  Density rho;  // single copy
  double y = 0;
  Index N = 0;
  Schedule schedule;
  double value = 0;  // min Tr[(rho^{(x)N} - 2^{yN} sigma)_+]
  double fw_gap = 0;
  double mu_N = 0;
  Density sigma_N;
  Density rho_N;
  double overlap = 0;  // |<rho_N|rho^{(x)N}>| of the purifications
  bool reduced = false;
  double eps_N = 0;
  double c_N = 0;
  Density sigma_tilde;
  Density delta_tilde;
  std::vector<Certificate> certificates;
};

// The step functions append certificates to the trace and throw CertificateFailed
// at the first failure, leaving the partial trace in place.
void step1(PipelineTrace& t, const Density& rho, double y, Index N, const FreeFamily& f, const SolverSettings& s);
PipelineTrace step1(const Density& rho, double y, Index N, const FreeFamily& f, const SolverSettings& s);
void step2(PipelineTrace& t, const Schedule& schedule, std::uint64_t seed = 1);
Certificate relent_bound_certificate(PipelineTrace& t, const Schedule& schedule);
Certificate asym_free_certificate(PipelineTrace& t, const Schedule& schedule, const FreeFamily& f,
                                  const SolverSettings& s);

struct SandwichReport {
  Index N = 0;
  double epsilon = 0;
  double relent = 0;  // R_R(rho^{(x)N})
  double middle = 0;  // min over the epsilon-enlarged family
  double lower = 0;   // proof's lower bound on the middle term
  double upper = 0;   // R_R(rho^{(x)N})
  Certificate upper_cert;  // (upper - middle) / N
  Certificate lower_cert;  // (middle - lower) / N
};

SandwichReport finite_n_sandwich(const Density& rho, const FreeFamily& f, Index N, double epsilon,
                                 const SolverSettings& s);

void save_trace(const PipelineTrace& t, const std::filesystem::path& dir);

}  // namespace stein
