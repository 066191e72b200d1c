#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stein/opalg.hpp"

namespace stein {

enum class FamilyKind { Diagonal, SingletonIid, FullSpace, SeparableHull };

// Free states on H^{(x)N}. For SeparableHull each copy is H_A (x) H_B and the
// separability cut is A^N | B^N.
class FreeFamily {
 public:
  static FreeFamily diagonal(Index d, Index copies);
  static FreeFamily singleton_iid(Density sigma0, Index copies);
  static FreeFamily full_space(Index d, Index copies);
  static FreeFamily separable_hull(Index dim_a, Index dim_b, Index copies, int restarts = 32);

  FamilyKind kind() const { return kind_; }
  Index base_dim() const { return base_dim_; }
  Index copies() const { return copies_; }
  SystemShape shape() const { return SystemShape::uniform(base_dim_, copies_); }
  Index total_dim() const { return shape().total_dim(); }
  const Density& sigma0() const { return sigma0_; }
  Index dim_a() const { return dim_a_; }
  Index dim_b() const { return dim_b_; }
  int restarts() const { return restarts_; }

  FreeFamily with_copies(Index copies) const;
  std::string describe() const;

 private:
  FamilyKind kind_ = FamilyKind::FullSpace;
  Index base_dim_ = 1;
  Index copies_ = 1;
  Density sigma0_;
  Index dim_a_ = 1, dim_b_ = 1;
  int restarts_ = 32;
};

// Distance-like violation: 0 for members (off-diagonal mass, trace distance, or
// distance to the separable hull).
double membership_violation(const FreeFamily& f, const Density& sigma);
bool membership(const FreeFamily& f, const Density& sigma, double tol = 1e-8);

Density linear_min_oracle(const FreeFamily& f, const Operator& g, std::uint64_t seed = 0);
Density full_rank_witness(const FreeFamily& f);
// Full-rank witness when one exists, otherwise sigma0^{(x)N}.
Density some_member(const FreeFamily& f);
Density random_member(const FreeFamily& f, std::uint64_t seed);

struct SeesawResult {
  Pure state;  // product across A^N | B^N, in (AB)^N ordering
  double value = 0;
  std::vector<double> history;  // value after every half-step of the best restart
};

SeesawResult seesaw_min(const Operator& g, Index dim_a, Index dim_b, Index copies, int restarts, std::uint64_t seed,
                        int max_iters = 100, double tol = 1e-9);

// Partial transpose on the B^N factors; lambda_min < 0 certifies entanglement.
Operator partial_transpose_b(const Operator& a, Index dim_a, Index dim_b, Index copies);

struct PropertyReport {
  int property_id = 0;
  int trials = 0;
  double worst_margin = 0;
  bool pass = false;
};

PropertyReport check_property(const FreeFamily& f, int property_id, int trials, std::uint64_t seed);

}  // namespace stein
