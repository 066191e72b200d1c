#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "stein/frank_wolfe.hpp"

namespace stein {

// min over f of Tr[(rho - b sigma)_+]
OptResult min_positive_part(const Density& rho, double b, const FreeFamily& f, const SolverSettings& s,
                            const std::optional<Density>& start = std::nullopt);

struct NeymanPearsonTest {
  Operator test;         // 0 <= E <= I
  double acceptance = 0;  // Tr[E eta]
  double worst_free = 0;  // max over f of Tr[E sigma]
};

// Test against a single sigma at level 1/K: projector onto eta - b sigma > window, plus a
// fraction c of the tie space |lambda| <= window chosen so that Tr[E sigma] = 1/K.
NeymanPearsonTest neyman_pearson(const Density& eta, const Density& sigma, double b, double K, double window);

struct DualResult {
  double value = 0;
  double b = 0;
  Density sigma;
};

DualResult hypothesis_dual_solve(const Density& eta, double K, const FreeFamily& f, const SolverSettings& s);
double hypothesis_dual(const Density& eta, double K, const FreeFamily& f, const SolverSettings& s);

struct PrimalResult {
  double value = 0;
  NeymanPearsonTest test;  // feasible: worst_free <= 1/K
  DualResult dual;         // the dual solution the test was built from
};

PrimalResult hypothesis_primal_solve(const Density& eta, double K, const FreeFamily& f, const SolverSettings& s);
double hypothesis_primal(const Density& eta, double K, const FreeFamily& f, const SolverSettings& s);

OptResult rel_ent_of_resource(const Density& rho, const FreeFamily& f, const SolverSettings& s);

using FamilyBuilder = std::function<FreeFamily(Index)>;
struct RegularizedPoint {
  Index N = 0;
  double per_copy = 0;
  double fw_gap = 0;
};
std::vector<RegularizedPoint> regularized_sequence(const Density& rho, const FamilyBuilder& build, Index n_max,
                                                   const SolverSettings& s, Index dim_cap = 1024);

struct RobustnessResult {
  double value = 0;      // smallest certified-feasible s
  Density sigma;         // rho <= (1 + value) sigma
  double margin = 0;     // lambda_min((1 + value) sigma - rho)
  double lower = 0;      // largest s found infeasible
};

RobustnessResult generalized_robustness_solve(const Density& rho, const FreeFamily& f, const SolverSettings& s);
double generalized_robustness(const Density& rho, const FreeFamily& f, const SolverSettings& s);

OptResult distance_to_family(const Density& target, const FreeFamily& f, const SolverSettings& s,
                             const std::optional<Density>& start = std::nullopt);

}  // namespace stein
