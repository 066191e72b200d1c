#include <doctest.h>

#include <cmath>

#include "stein/random.hpp"
#include "stein/symmetry.hpp"

using namespace stein;

namespace {

Pure qubit(double p) {
  Vector v(2);
  v << std::sqrt(p), std::sqrt(1.0 - p);
  return Pure(SystemShape{2}, v);
}

Pure orth(const Pure& b) {
  Vector v(2);
  v << -std::conj(b.amplitudes()(1)), std::conj(b.amplitudes()(0));
  return Pure(SystemShape{2}, v);
}

double dist(const Vector& a, const Vector& b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("symmetric subspace dimension and projector") {
  CHECK(sym_dim(3, 2) == 4);
  CHECK(sym_dim(2, 3) == 6);
  CHECK(sym_dim(1, 5) == 5);

  CHECK((sym_projector(1, 3).matrix() - Matrix::Identity(3, 3)).norm() < 1e-15);
  const Operator p2 = sym_projector(2, 2);
  CHECK(std::lround(p2.trace()) == 3);
  Vector singlet = Vector::Zero(4);
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  CHECK((p2.matrix() * singlet).norm() < 1e-15);
  for (Index n = 1; n <= 4; ++n)
    for (Index d = 2; d <= 3; ++d) {
      const Operator p = sym_projector(n, d);
      CHECK(std::lround(p.trace()) == sym_dim(n, d));
      CHECK((p.matrix() * p.matrix() - p.matrix()).norm() < 1e-12);
    }
}

TEST_CASE("twirl") {
  Rng rng(2);
  const Density x = random_density(SystemShape{2, 2, 2}, rng);
  const Density t = twirl(x);
  CHECK(permutation_residual(t.op()) < 1e-13);
  CHECK((twirl(t).matrix() - t.matrix()).norm() < 1e-13);
  CHECK(t.op().trace() == doctest::Approx(1.0));
}

TEST_CASE("symmetrize tail") {
  const Pure b = qubit(0.8);
  const Pure psi = orth(b);
  CHECK(dist(symmetrize_tail(b, psi, 3, 0).amplitudes(), tensor_power(b, 3).amplitudes()) < 1e-14);

  const Vector want = (tensor(b, psi).amplitudes() + tensor(psi, b).amplitudes()) / std::sqrt(2.0);
  CHECK(dist(symmetrize_tail(b, psi, 2, 1).amplitudes(), want) < 1e-14);

  const Pure psi2 = tensor(psi, psi);
  CHECK(symmetrize_tail(b, psi2, 3, 2).amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("almost power states") {
  const Pure b = qubit(0.7);
  AlmostPowerSpec s0;
  s0.base = b;
  s0.n = 3;
  s0.R = 0;
  s0.betas = Vector::Ones(1);
  s0.orth_components = {Pure()};
  CHECK(dist(build_almost_power(s0).amplitudes(), tensor_power(b, 3).amplitudes()) < 1e-14);

  AlmostPowerSpec s1 = s0;
  s1.R = 1;
  s1.betas = Vector::Zero(2);
  s1.betas(1) = 1.0;
  s1.orth_components = {Pure(), orth(b)};
  const Pure v = build_almost_power(s1);
  CHECK(std::abs(v.amplitudes().dot(tensor_power(b, 3).amplitudes())) < 1e-14);
  CHECK(symmetric_residual(v) < 1e-13);

  // defect decomposition of a random almost power state has no weight beyond R
  Rng rng(4);
  AlmostPowerSpec s2;
  s2.base = b;
  s2.n = 4;
  s2.R = 2;
  s2.betas = ginibre(3, 1, rng).col(0).normalized();
  s2.orth_components = {Pure(), orth(b), tensor(orth(b), orth(b))};
  const Pure w = build_almost_power(s2);
  const auto comps = defect_components(w.amplitudes(), b, 4);
  REQUIRE(comps.size() == 5);
  CHECK(comps[3].norm() < 1e-12);
  CHECK(comps[4].norm() < 1e-12);
  CHECK(truncate_to_almost_power(w, b, 2).distance < 1e-12);
}

TEST_CASE("truncation") {
  const Pure b = qubit(0.6);
  const Pure p = tensor_power(b, 4);
  for (Index R = 0; R <= 2; ++R) {
    const Truncation t = truncate_to_almost_power(p, b, R);
    CHECK(t.distance < 1e-12);
    CHECK(dist(t.state.amplitudes(), p.amplitudes()) < 1e-12);
  }
  Rng rng(6);
  const Vector sym = symmetrize_vector(random_pure(SystemShape::uniform(2, 4), rng).amplitudes(), 2, 4);
  const Pure v = Pure::normalized(SystemShape::uniform(2, 4), sym);
  const Truncation t1 = truncate_to_almost_power(v, b, 1);
  CHECK(t1.distance >= 0.0);
  CHECK(t1.distance <= 2.0 + 1e-12);
}

TEST_CASE("purification") {
  Rng rng(8);
  const Density r = random_density(SystemShape{2}, rng);
  const PurificationPair iid = perm_invariant_purification(r, tensor_power(r, 3));
  CHECK(iid.overlap == doctest::Approx(1.0).epsilon(1e-10));

  const Density rn = twirl(random_density(SystemShape::uniform(2, 3), rng));
  const PurificationPair pp = perm_invariant_purification(r, rn);
  CHECK(pp.overlap == doctest::Approx(fidelity(rn.op(), tensor_power(r, 3).op())).epsilon(1e-6));
  CHECK(symmetric_residual(pp.rhoN_pur) < 1e-9);
}

TEST_CASE("conditioned state") {
  Rng rng(10);
  const Density r = random_density(SystemShape{2}, rng);
  const PurificationPair iid = perm_invariant_purification(r, tensor_power(r, 4));
  const ConditionedState c = conditioned_state(iid.rhoN_pur, iid.rho_pur, 1);
  CHECK(std::abs(c.state.amplitudes().dot(tensor_power(iid.rho_pur, 3).amplitudes())) == doctest::Approx(1.0).epsilon(1e-10));

  const ConditionedState c0 = conditioned_state(iid.rhoN_pur, iid.rho_pur, 0);
  CHECK(std::abs(c0.state.amplitudes().dot(iid.rhoN_pur.amplitudes())) == doctest::Approx(1.0).epsilon(1e-12));

  const Density rn = twirl(random_density(SystemShape::uniform(2, 4), rng));
  const PurificationPair pp = perm_invariant_purification(r, rn);
  const ConditionedState c1 = conditioned_state(pp.rhoN_pur, pp.rho_pur, 1);
  CHECK(c1.certificate.margin >= -1e-9);
}

TEST_CASE("power inequality") {
  const Pure b = qubit(0.8);
  CHECK(verify_power_inequality(tensor_power(b, 4), b, 4, 0, 0).pass);

  Rng rng(12);
  for (auto [N, M, R] : {std::tuple<Index, Index, Index>{4, 1, 1}, {6, 2, 2}}) {
    const Index n = N - M;
    AlmostPowerSpec s;
    s.base = b;
    s.n = n;
    s.R = R;
    s.betas = ginibre(R + 1, 1, rng).col(0).normalized();
    s.orth_components = {Pure()};
    Pure o = orth(b);
    for (Index r = 1; r <= R; ++r) {
      s.orth_components.push_back(o);
      o = tensor(o, orth(b));
    }
    const Certificate c = verify_power_inequality(build_almost_power(s), b, N, M, R);
    CHECK(c.margin >= -1e-8);
  }
}

TEST_CASE("positive part helpers") {
  const Pure a = qubit(0.9), b = qubit(0.4);
  const Pure dir = positive_direction(a, b, a);
  const Operator diff = Density(a).op() - Density(b).op();
  const double top = eigh(diff).values.maxCoeff();
  CHECK(std::abs(dir.amplitudes().dot(diff.matrix() * dir.amplitudes()) - top) < 1e-12);
  CHECK(dist(positive_direction(a, a, b).amplitudes(), b.amplitudes()) < 1e-15);

  const Matrix u = basis_completion(a.amplitudes());
  CHECK((u.adjoint() * u - Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK(dist(u.col(0), a.amplitudes()) < 1e-14);
}
