#pragma once

#include <cstdint>
#include <vector>

#include "stein/certificate.hpp"
#include "stein/opalg.hpp"

namespace stein {

inline constexpr Index kPurifiedDimensionCap = 4096;
inline constexpr Index kDenseDimensionCap = 4096;

Index sym_dim(Index n, Index d);
Operator sym_projector(Index n, Index d);

// (1/n!) sum_pi U_pi a U_pi^dagger over permutations of the (equal-dimension) subsystems.
Operator twirl(const Operator& a);
Density twirl(const Density& a);
// (1/n!) sum_pi U_pi v; the orthogonal projection onto the symmetric subspace.
Vector symmetrize_vector(const Vector& v, Index d, Index n);
double symmetric_residual(const Pure& v);
double permutation_residual(const Operator& a);

// U^{(x)n} v for a single-factor matrix U.
Vector apply_local(const Vector& v, const Matrix& u, Index d, Index n);

struct AlmostPowerSpec {
  Pure base;                      // |rho> on one factor
  Index n = 0;                    // N - M
  Index R = 0;
  Vector betas;                   // length R + 1
  std::vector<Pure> orth_components;  // entry r lives on r factors; entry 0 unused
};

Pure symmetrize_tail(const Pure& base, const Pure& psi_r, Index n, Index r);
Pure build_almost_power(const AlmostPowerSpec& spec);

// Components of v with exactly r factors outside span{base}, r = 0..n.
std::vector<Vector> defect_components(const Vector& v, const Pure& base, Index n);

struct PurificationPair {
  Pure rho_pur;   // on S (x) E
  Pure rhoN_pur;  // on (S (x) E)^{(x)N}
  double overlap = 0;
};

Pure standard_purification(const Density& rho);
PurificationPair perm_invariant_purification(const Density& rho, const Density& rho_n, std::uint64_t seed = 1);

struct ConditionedState {
  Pure state;
  double overlap = 0;  // |<rho_N|rho^{(x)N}>|
  Certificate certificate;
};

ConditionedState conditioned_state(const Pure& rhoN_pur, const Pure& rho_pur, Index M);

struct Truncation {
  Pure state;
  double distance = 0;  // trace distance between the pure states
};

Truncation truncate_to_almost_power(const Pure& v, const Pure& base, Index R);

// |rho><rho|^{(x)(n-R)} <= 2^{N h(R/n)} N^2 Tr_{1..R}[v v^dagger + (2 sqrt(2R)/N) Delta], n = N - M.
struct PowerInequality {
  Certificate certificate;
  Pure delta;           // Delta_{N,M,R} on n factors (rank one)
  Pure thresholded;     // the |beta_r| >= 1/N truncation
};

PowerInequality power_inequality(const Pure& v, const Pure& base, Index N, Index M, Index R);
Certificate verify_power_inequality(const Pure& v, const Pure& base, Index N, Index M, Index R);

// Delta = (a - b)_+ / Tr[(a - b)_+]; falls back to `fallback` when a == b.
Density normalized_positive_part(const Operator& a, const Operator& b, const Density& fallback);
// Same for a = |x><x|, b = |y><y|, where the positive part has rank one.
Pure positive_direction(const Pure& x, const Pure& y, const Pure& fallback);

// Local unitary whose first column is `base`.
Matrix basis_completion(const Vector& base);

}  // namespace stein
