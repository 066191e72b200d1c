#include <doctest.h>

#include <cmath>

#include "stein/entropy.hpp"
#include "stein/random.hpp"

using namespace stein;

namespace {

Density diag2(double a, double b) {
  RealVector d(2);
  d << a, b;
  return Density::diagonal(SystemShape{2}, d);
}

Density plus() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return Density(Pure(SystemShape{2}, v));
}

}  // namespace

TEST_CASE("von Neumann entropy") {
  Rng rng(1);
  CHECK(von_neumann_entropy(Density(random_pure(SystemShape{3}, rng))) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(von_neumann_entropy(Density::maximally_mixed(SystemShape{2})) == doctest::Approx(1.0));
  CHECK(von_neumann_entropy(diag2(0.75, 0.25)) == doctest::Approx(0.811278124459).epsilon(1e-10));
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy(0.8) == doctest::Approx(0.721928094887).epsilon(1e-10));
  CHECK_THROWS_AS(binary_entropy(1.5), Error);
}

TEST_CASE("relative entropy") {
  Rng rng(2);
  const Density r = random_density(SystemShape{3}, rng);
  CHECK(relative_entropy(r, r).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  const auto inf = relative_entropy(diag2(1, 0), diag2(0, 1));
  CHECK(inf.support_violation);
  CHECK(std::isinf(inf.value));

  CHECK(relative_entropy(plus(), Density::maximally_mixed(SystemShape{2})).value == doctest::Approx(1.0).epsilon(1e-12));

  // commuting case equals the classical KL divergence
  const double kl = 0.75 * std::log2(1.5) + 0.25 * std::log2(0.5);
  CHECK(relative_entropy(diag2(0.75, 0.25), diag2(0.5, 0.5)).value == doctest::Approx(kl).epsilon(1e-12));
}

TEST_CASE("continuity bounds") {
  CHECK(entropy_continuity_bound(2, 0.0) == 0.0);
  CHECK(entropy_continuity_bound(2, 0.25) == doctest::Approx(1.5));
  CHECK_THROWS_AS(entropy_continuity_bound(2, 0.7), Error);

  CHECK(relent_continuity_bound(0.5, 0.0).bound_value == 0.0);
  CHECK(relent_continuity_bound(0.5, 0.125).bound_value == doctest::Approx(1.5));
  CHECK_THROWS_AS(relent_continuity_bound(1.0, 0.1), Error);
}

TEST_CASE("relative entropy upper bound") {
  CHECK(relent_upper_bound(Density::maximally_mixed(SystemShape{4})) == doctest::Approx(2.0));
  CHECK(relent_upper_bound(diag2(0.9, 0.1)) == doctest::Approx(std::log2(10.0)));
  CHECK_THROWS_AS(relent_upper_bound(diag2(1, 0)), Error);
}

TEST_CASE("dominance to relative entropy bound") {
  Rng rng(4);
  const Density r = random_density(SystemShape{2}, rng);
  const auto c0 = dominance_to_relent_bound(r, r, 1.0);
  CHECK(c0.pass);
  CHECK(c0.margin == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  const auto c1 = dominance_to_relent_bound(plus(), Density::maximally_mixed(SystemShape{2}), 2.0);
  CHECK(c1.pass);
  CHECK(std::abs(c1.margin) < 1e-12);

  try {
    dominance_to_relent_bound(diag2(1, 0), diag2(0, 1), 10.0);
    FAIL("expected PremiseFailed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PremiseFailed);
  }
}
