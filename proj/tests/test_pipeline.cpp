#include <doctest.h>

#include <cmath>

#include "stein/entropy.hpp"
#include "stein/pipeline.hpp"
#include "stein/symmetry.hpp"

using namespace stein;

namespace {

Density coherence(double p) {
  Vector v(2);
  v << std::sqrt(p), std::sqrt(1.0 - p);
  return Density(Pure(SystemShape{2}, v));
}

Density diag(double a, double b) {
  RealVector d(2);
  d << a, b;
  return Density::diagonal(SystemShape{2}, d);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::ParseError;
}

// rho_N = rho^{(x)N}, sigma_N = (I/2)^{(x)N}, y = 1, mu = 1
PipelineTrace iid_trace(const Density& rho, Index N) {
  PipelineTrace t;
  t.rho = rho;
  t.y = 1.0;
  t.N = N;
  t.mu_N = 1.0;
  t.rho_N = tensor_power(rho, N);
  t.sigma_N = Density::maximally_mixed(SystemShape::uniform(2, N));
  return t;
}

}  // namespace

TEST_CASE("schedule") {
  const Schedule s64 = mr_schedule(64);
  CHECK(s64.M == 16);
  CHECK(s64.R == 16);
  const Schedule s8 = mr_schedule(8);
  CHECK(s8.M == 4);
  CHECK(s8.R == 2);
  const Schedule s4 = mr_schedule(4);
  CHECK(s4.M == 3);
  CHECK(s4.R == 0);
  for (Index N = 4; N <= 40; ++N) {
    const Schedule s = mr_schedule(N);
    CHECK(N - s.M >= 2 * s.R);
  }
}

TEST_CASE("dominated state") {
  const Density r = coherence(0.3);
  const DominatedState d0 = dominated_state(r, r.op(), Operator::zero(r.shape()));
  CHECK((d0.state.matrix() - r.matrix()).norm() < 1e-10);
  CHECK(d0.op_cert.margin >= -1e-10);
  CHECK(fidelity(d0.state.op(), r.op()) == doctest::Approx(1.0).epsilon(1e-9));

  const Density half = Density::maximally_mixed(SystemShape{2});
  const DominatedState d1 = dominated_state(half, half.op(), half.op() * 0.1);
  CHECK(d1.op_cert.pass);
  CHECK(d1.fidelity_cert.pass);
  CHECK(fidelity(d1.state.op(), half.op()) >= 0.9);

  CHECK(kind_of([&] { dominated_state(coherence(0.5), diag(1, 0).op() * 0.5, Operator::zero(half.shape())); }) ==
        ErrorKind::PremiseFailed);
}

TEST_CASE("epsilon_N") {
  CHECK(epsilon_n(8, 4, 4, 1.0, 0.5) == doctest::Approx(2.7230e-3).epsilon(1e-3));
  const double a = 2 * std::sqrt(2.0) / (0.5 * std::exp(16.0 / 16.0));
  const double b = 2 * std::sqrt(8.0) / 8.0;
  CHECK(std::abs(epsilon_n(8, 4, 4, 1.0, 0.5) - 2 * 0.125 / 256.0 * (a + b)) < 1e-17);
}

TEST_CASE("step1 premise") {
  SolverSettings s;
  const auto dg = FreeFamily::diagonal(2, 1);
  CHECK(kind_of([&] { step1(diag(0.6, 0.4), 0.5, 4, dg, s); }) == ErrorKind::PremiseOutOfInterval);
  CHECK(kind_of([&] { step1(coherence(0.8), 5.0, 6, dg, s); }) == ErrorKind::PremiseOutOfInterval);
  CHECK(kind_of([&] { step1(coherence(0.8), -1.0, 6, dg, s); }) == ErrorKind::DomainViolation);
}

TEST_CASE("coherence pipeline at N = 6") {
  SolverSettings s;
  const auto dg = FreeFamily::diagonal(2, 1);
  const double y = binary_entropy(0.8);
  PipelineTrace t = step1(coherence(0.8), y, 6, dg, s);
  CHECK(t.value > kPremiseWindow);
  CHECK(t.value < 1 - kPremiseWindow);
  CHECK(all_pass(t.certificates));
  const Schedule sch = mr_schedule(6);
  step2(t, sch);
  CHECK(all_pass(t.certificates));
  CHECK(t.eps_N == epsilon_n(6, sch.M, sch.R, y, t.mu_N));
  CHECK(relent_bound_certificate(t, sch).pass);
  CHECK(asym_free_certificate(t, sch, dg, s).pass);
  for (const auto& c : t.certificates) CHECK_MESSAGE(c.margin >= -1e-8, c.name);

  // corrupted sigma~ loses support
  PipelineTrace bad = t;
  const Index k = 6 - sch.M - sch.R;
  RealVector e = RealVector::Zero(1 << k);
  e(e.size() - 1) = 1.0;
  bad.sigma_tilde = Density::diagonal(SystemShape::uniform(2, k), e);
  CHECK(kind_of([&] { relent_bound_certificate(bad, sch); }) == ErrorKind::CertificateFailed);

  // a resource state is far from the free set
  PipelineTrace far = t;
  far.eps_N = 1e-3;
  far.sigma_tilde = tensor_power(coherence(0.5), k);
  CHECK(kind_of([&] { asym_free_certificate(far, sch, dg, s); }) == ErrorKind::CertificateFailed);
}

TEST_CASE("IID synthetic trace") {
  PipelineTrace t = iid_trace(coherence(0.8), 6);
  const Schedule sch = mr_schedule(6);
  step2(t, sch);
  CHECK(all_pass(t.certificates));
  CHECK(relent_bound_certificate(t, sch).margin > 1.0);
}

TEST_CASE("finite N sandwich") {
  SolverSettings s;
  const auto dg = FreeFamily::diagonal(2, 1);
  const SandwichReport r = finite_n_sandwich(coherence(0.8), dg, 3, 1e-4, s);
  CHECK(r.upper_cert.pass);
  CHECK(r.lower_cert.pass);
  CHECK(r.relent / 3 == doctest::Approx(binary_entropy(0.8)).epsilon(1e-5));

  const SandwichReport z = finite_n_sandwich(coherence(0.8), dg, 2, 1e-30, s);
  CHECK(std::abs(z.upper - z.middle) / 2 < 1e-6);
  CHECK(std::abs(z.middle - z.lower) / 2 < 1e-6);
  CHECK_THROWS_AS(finite_n_sandwich(coherence(0.8), dg, 2, 0.0, s), Error);
}
