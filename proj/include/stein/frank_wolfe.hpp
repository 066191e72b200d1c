#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "stein/freesets.hpp"
#include "stein/opalg.hpp"

namespace stein {

struct SolverSettings {
  int max_iters = 2000;
  double tol = 1e-7;
  std::uint64_t seed = 7;
  int restarts = 32;
  bool symmetrize = false;  // twirl every oracle output over permutations of the copies
  // early exits for feasibility questions
  double stop_if_lower_above = std::numeric_limits<double>::infinity();
  double stop_if_upper_below = -std::numeric_limits<double>::infinity();
};

void validate(const SolverSettings& s);

struct OptResult {
  double value = 0;        // exact objective at minimizer
  Density minimizer;
  double fw_gap = 0;       // value - certified lower bound
  int iterations = 0;
  bool converged = false;  // fw_gap <= tol
};

struct Evaluation {
  double value = 0;
  double exact = 0;
  Operator gradient;
  // When finite, offset + min over the family of Tr[gradient sigma] lower-bounds exact().
  double offset = -std::numeric_limits<double>::infinity();
};

// Convex objective on states. value() may be a smooth model of exact() with
// value <= exact pointwise; both are used for the certified gap.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Operator& sigma) const = 0;
  virtual Operator gradient(const Operator& sigma) const = 0;
  virtual double exact(const Operator& sigma) const { return value(sigma); }
  virtual std::pair<double, Operator> value_and_gradient(const Operator& sigma) const {
    return {value(sigma), gradient(sigma)};
  }
  virtual double directional(const Operator& sigma, const Operator& dir) const { return inner(gradient(sigma), dir); }
  virtual Evaluation evaluate(const Operator& sigma) const {
    auto [v, g] = value_and_gradient(sigma);
    return {v, exact(sigma), std::move(g)};
  }
};

class LinearObjective final : public Objective {
 public:
  explicit LinearObjective(Operator g) : g_(std::move(g)) {}
  double value(const Operator& s) const override { return inner(g_, s); }
  Operator gradient(const Operator&) const override { return g_; }

 private:
  Operator g_;
};

class SquaredDistanceObjective final : public Objective {
 public:
  explicit SquaredDistanceObjective(Operator target) : t_(std::move(target)) {}
  double value(const Operator& s) const override { return (s.matrix() - t_.matrix()).squaredNorm(); }
  Operator gradient(const Operator& s) const override { return (s - t_) * 2.0; }

 private:
  Operator t_;
};

// Tr[(rho - b sigma)_+] with a Huber model of width tau on each eigenvalue.
class PositivePartObjective final : public Objective {
 public:
  PositivePartObjective(Operator rho, double b, double tau) : rho_(std::move(rho)), b_(b), tau_(tau) {}
  double value(const Operator& s) const override;
  Operator gradient(const Operator& s) const override;
  double exact(const Operator& s) const override;
  std::pair<double, Operator> value_and_gradient(const Operator& s) const override;
  double directional(const Operator& s, const Operator& dir) const override;
  Evaluation evaluate(const Operator& s) const override;

 private:
  Operator rho_;
  double b_, tau_;
};

// ||sigma - target||_1 with a Huber model of width tau.
class TraceDistanceObjective final : public Objective {
 public:
  TraceDistanceObjective(Operator target, double tau) : t_(std::move(target)), tau_(tau) {}
  double value(const Operator& s) const override;
  Operator gradient(const Operator& s) const override;
  double exact(const Operator& s) const override;
  std::pair<double, Operator> value_and_gradient(const Operator& s) const override;
  double directional(const Operator& s, const Operator& dir) const override;
  Evaluation evaluate(const Operator& s) const override;

 private:
  Operator t_;
  double tau_;
};

// D(rho || (1-kappa) sigma + kappa w) in bits.
class RelativeEntropyObjective final : public Objective {
 public:
  RelativeEntropyObjective(Density rho, Density witness, double kappa = 1e-9);
  double value(const Operator& s) const override;
  Operator gradient(const Operator& s) const override;
  std::pair<double, Operator> value_and_gradient(const Operator& s) const override;
  Evaluation evaluate(const Operator& s) const override;
  Operator mixed(const Operator& s) const;

 private:
  Density rho_;
  Operator w_;
  double kappa_;
  double neg_entropy_;
};

// Fréchet derivative of X -> Tr[rho ln X] at X (X > 0), i.e. the operator G with
// d/dt Tr[rho ln(X + tD)] = Tr[G D].
Operator log_frechet_gradient(const Operator& x, const Operator& rho);

struct ActiveSet {
  std::vector<Operator> atoms;
  std::vector<double> weights;
  Operator point() const;
};

struct FrankWolfeState {
  ActiveSet active;
  double upper = 0;   // best exact value seen
  double lower = 0;   // certified lower bound on the exact minimum
  Operator best;
  int iterations = 0;
};

// Pairwise Frank-Wolfe with derivative line search. Continues from `state` when it
// carries a non-empty active set; stops once upper - lower <= tol or the model gap
// drops below inner_tol.
void frank_wolfe_run(const Objective& obj, const FreeFamily& f, const SolverSettings& s, FrankWolfeState& state,
                     double inner_tol, int iter_budget);

OptResult frank_wolfe(const Objective& obj, const FreeFamily& f, const SolverSettings& s,
                      const std::optional<Density>& start = std::nullopt);

// Continuation in the Huber width for the nonsmooth objectives.
using SmoothedFactory = std::function<std::unique_ptr<Objective>(double tau)>;
OptResult minimize_smoothed(const SmoothedFactory& make, const FreeFamily& f, const SolverSettings& s,
                            const std::optional<Density>& start = std::nullopt);

}  // namespace stein
