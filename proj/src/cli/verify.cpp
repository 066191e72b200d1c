#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "stein/cli.hpp"
#include "stein/entropy.hpp"
#include "stein/pipeline.hpp"
#include "stein/random.hpp"
#include "stein/symmetry.hpp"

namespace stein::cli {

namespace {

using Trial = std::function<double(Rng&)>;

struct Check {
  const char* suite;
  const char* name;
  double tolerance;
  Trial run;
};

Index pick(Rng& rng, Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }
double unif(Rng& rng, double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Operator log2_op(const Operator& a) {
  return spectral_apply(a, [](double x) { return std::log2(x); });
}

Density full_rank(Index d, Rng& rng) {
  const Density r = random_density(SystemShape{d}, rng);
  return mix(r, Density::maximally_mixed(SystemShape{d}), 0.02);
}

Density any_rank(Index d, Rng& rng) { return random_density(SystemShape{d}, rng, pick(rng, 1, d)); }

double rel(const Density& a, const Density& b) { return relative_entropy(a, b).value; }

// ---- operator inequalities ---------------------------------------------------

double channel_positive_part(Rng& rng) {
  const Index din = pick(rng, 2, 6), dout = pick(rng, 2, 6);
  const Index need = (din + dout - 1) / dout;
  const Index nk = pick(rng, need, std::max<Index>(need, 4));
  const Operator a = random_hermitian(SystemShape{din}, rng);
  const Operator out = apply_kraus(a, random_channel(din, dout, nk, rng));
  return positive_part_trace(a) - positive_part_trace(out);
}

double partial_trace_monotone(Rng& rng) {
  static const Index shapes[][2] = {{2, 2}, {2, 3}, {3, 2}};
  const auto& s = shapes[pick(rng, 0, 2)];
  const SystemShape sh{s[0], s[1]};
  const Operator b = random_hermitian(sh, rng);
  const Matrix g = ginibre(sh.total_dim(), pick(rng, 1, sh.total_dim()), rng);
  const Operator a = b + Operator(sh, g * g.adjoint());
  return lambda_min(Operator(partial_trace(a, {1}) - partial_trace(b, {1})));
}

double log_monotone(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const SystemShape sh{d};
  const Operator q = mix(random_density(sh, rng), Density::maximally_mixed(sh), 0.1).op();
  const Matrix g = ginibre(d, pick(rng, 1, d), rng);
  const Operator p = q + Operator(sh, g * g.adjoint()) * unif(rng, 0.01, 1.0);
  return lambda_min(Operator(log2_op(p) - log2_op(q)));
}

double trace_distance_inequality(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const Density rho = any_rank(d, rng), sigma = any_rank(d, rng);
  const Operator diff = rho.op() - sigma.op();
  const Operator pp = positive_part(diff);
  const double eps = trace_norm(diff);
  return lambda_min(Operator(sigma.op() + pp * (eps / pp.trace()) - rho.op()));
}

double dominated_state_check(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const Density rho = any_rank(d, rng);
  const Density sigma = full_rank(d, rng);
  const double c = unif(rng, 1.0, 4.0);
  const Operator x = sigma.op() * c;
  const Operator delta = positive_part(Operator(rho.op() - x));
  try {
    const DominatedState ds = dominated_state(rho, x, delta, 1e-8);
    return std::min(ds.op_cert.margin, ds.fidelity_cert.margin);
  } catch (const Error&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double positive_part_idempotent(Rng& rng) {
  const Operator a = random_hermitian(SystemShape{pick(rng, 2, 6)}, rng);
  const Operator p = positive_part(a);
  return -trace_norm(Operator(positive_part(p) - p));
}

double trace_norm_triangle(Rng& rng) {
  const SystemShape sh{pick(rng, 2, 6)};
  const Operator a = random_hermitian(sh, rng), b = random_hermitian(sh, rng), c = random_hermitian(sh, rng);
  return trace_norm(Operator(a - b)) + trace_norm(Operator(b - c)) - trace_norm(Operator(a - c));
}

// ---- entropy bounds ------------------------------------------------------------

double entropy_continuity(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const Density rho = any_rank(d, rng), tau = any_rank(d, rng);
  const double full = trace_norm(Operator(rho.op() - tau.op()));
  const double t = full > 0 ? std::min(1.0, unif(rng) * 0.5 / full) : 0.0;
  const Density sigma = mix(rho, tau, t);
  const double eps = std::min(0.5, trace_norm(Operator(rho.op() - sigma.op())));
  return entropy_continuity_bound(d, eps) - std::abs(von_neumann_entropy(rho) - von_neumann_entropy(sigma));
}

double relent_continuity(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const Density rho = any_rank(d, rng);
  const Density s1 = full_rank(d, rng), tau = full_rank(d, rng);
  const double t = std::pow(10.0, -unif(rng, 0.0, 6.0));
  const Density s2 = mix(s1, tau, t);
  const double eps = trace_norm(Operator(s1.op() - s2.op()));
  const double m = std::min(lambda_min(s1.op()), lambda_min(s2.op()));
  return relent_continuity_bound(m, eps).bound_value - std::abs(rel(rho, s1) - rel(rho, s2));
}

double relent_upper(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const Density rho = any_rank(d, rng), sigma = full_rank(d, rng);
  return relent_upper_bound(sigma) - rel(rho, sigma);
}

double dominance_relent(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const Density rho = any_rank(d, rng), sigma = full_rank(d, rng);
  const auto ss = eigh(sigma.op());
  const Matrix w = ss.vectors * ss.values.cwiseInverse().cwiseSqrt().cast<std::complex<double>>().asDiagonal() *
                   ss.vectors.adjoint();
  const double top = lambda_max(Operator(SystemShape{d}, w * rho.matrix() * w));
  const double alpha = top * (1.0 + unif(rng, 1e-9, 1.0));
  return dominance_to_relent_bound(rho, sigma, alpha).margin;
}

double joint_convexity(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const Density rho = any_rank(d, rng), s1 = full_rank(d, rng), s2 = full_rank(d, rng);
  return 0.5 * (rel(rho, s1) + rel(rho, s2)) - rel(rho, mix(s1, s2, 0.5));
}

double additivity(Rng& rng) {
  const Index d1 = pick(rng, 2, 3), d2 = pick(rng, 2, 3);
  const Density r1 = any_rank(d1, rng), s1 = full_rank(d1, rng);
  const Density r2 = any_rank(d2, rng), s2 = full_rank(d2, rng);
  return -std::abs(rel(tensor(r1, r2), tensor(s1, s2)) - rel(r1, s1) - rel(r2, s2));
}

double classical_agreement(Rng& rng) {
  const Index d = pick(rng, 2, 6);
  const RealVector p = random_probability(d, rng), q = random_probability(d, rng);
  double kl = 0;
  for (Index k = 0; k < d; ++k) kl += p(k) * std::log2(p(k) / q(k));
  const SystemShape sh{d};
  return -std::abs(rel(Density::diagonal(sh, p), Density::diagonal(sh, q)) - kl);
}

// ---- optimisation ------------------------------------------------------------------

SolverSettings tight() {
  SolverSettings s;
  s.tol = 1e-9;
  s.max_iters = 4000;
  return s;
}

FreeFamily random_family(Index d, Rng& rng) {
  switch (pick(rng, 0, 3)) {
    case 0: return FreeFamily::diagonal(d, 1);
    case 1: return FreeFamily::full_space(d, 1);
    case 2:
      if (d == 4) return FreeFamily::separable_hull(2, 2, 1, 8);
      if (d == 6) return FreeFamily::separable_hull(2, 3, 1, 8);
      [[fallthrough]];
    default: return FreeFamily::singleton_iid(full_rank(d, rng), 1);
  }
}

double weak_duality(Rng& rng) {
  static const double Ks[] = {2.0, 4.0, 8.0};
  const Index d = pick(rng, 2, 6);
  const FreeFamily f = random_family(d, rng);
  const Density eta = any_rank(d, rng);
  const double K = Ks[pick(rng, 0, 2)];
  const PrimalResult p = hypothesis_primal_solve(eta, K, f, SolverSettings{});
  return p.dual.value - p.value;
}

// max p.E subject to q.E <= 1/K, 0 <= E <= 1
double knapsack(const RealVector& p, const RealVector& q, double budget) {
  std::vector<Index> order(static_cast<std::size_t>(p.size()));
  for (Index k = 0; k < p.size(); ++k) order[static_cast<std::size_t>(k)] = k;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return p(a) * q(b) > p(b) * q(a); });
  double val = 0;
  for (Index k : order) {
    if (budget <= 0) break;
    const double take = std::min(1.0, budget / q(k));
    val += take * p(k);
    budget -= take * q(k);
  }
  return val;
}

double classical_duality(Rng& rng) {
  static const double Ks[] = {2.0, 4.0, 8.0};
  const double K = Ks[pick(rng, 0, 2)];
  const SolverSettings s = tight();
  double exact = 0;
  Density eta;
  FreeFamily f;
  if (pick(rng, 0, 2) == 0) {
    const Index d = pick(rng, 2, 6);
    eta = Density::diagonal(SystemShape{d}, random_probability(d, rng));
    f = FreeFamily::diagonal(d, 1);
    exact = 1.0 / K;
  } else {
    const Index d = pick(rng, 2, 3), n = d == 2 ? pick(rng, 1, 2) : 1;
    const RealVector p = random_probability(d, rng), q = random_probability(d, rng);
    const SystemShape sh{d};
    const Density p1 = Density::diagonal(sh, p), q1 = Density::diagonal(sh, q);
    eta = tensor_power(p1, n);
    f = FreeFamily::singleton_iid(q1, n);
    const Density qn = tensor_power(q1, n);
    exact = knapsack(eta.matrix().diagonal().real(), qn.matrix().diagonal().real(), 1.0 / K);
  }
  const PrimalResult p = hypothesis_primal_solve(eta, K, f, s);
  return -std::max(std::abs(p.value - exact), std::abs(p.dual.value - exact));
}

double relent_diagonal(Rng& rng) {
  const Index d = pick(rng, 2, 4);
  const Density rho = any_rank(d, rng);
  const RealVector dg = rho.matrix().diagonal().real();
  const double oracle = von_neumann_entropy(Density::diagonal(SystemShape{d}, dg)) - von_neumann_entropy(rho);
  return -std::abs(rel_ent_of_resource(rho, FreeFamily::diagonal(d, 1), tight()).value - oracle);
}

double positive_part_monotone(Rng& rng) {
  const Index d = pick(rng, 2, 4);
  const FreeFamily f = random_family(d, rng);
  const Density rho = any_rank(d, rng);
  const SolverSettings s = tight();
  const double b1 = unif(rng, 0.0, 4.0), b2 = b1 + unif(rng, 0.0, 2.0);
  const OptResult r1 = min_positive_part(rho, b1, f, s), r2 = min_positive_part(rho, b2, f, s);
  return (r1.value - r1.fw_gap) - r2.value + r2.fw_gap;
}

double robustness_certified(Rng& rng) {
  const Index d = pick(rng, 2, 4);
  const FreeFamily f = random_family(d, rng);
  return generalized_robustness_solve(any_rank(d, rng), f, tight()).margin;
}

// ---- symmetric subspace -------------------------------------------------------------

double projector_idempotent(Rng& rng) {
  const Index d = pick(rng, 2, 3), n = pick(rng, 1, d == 2 ? 6 : 4);
  const Operator p = sym_projector(n, d);
  return -trace_norm(Operator(SystemShape::uniform(d, n), p.matrix() * p.matrix() - p.matrix()));
}

double projector_trace(Rng& rng) {
  const Index d = pick(rng, 2, 3), n = pick(rng, 1, d == 2 ? 6 : 4);
  return -std::abs(sym_projector(n, d).trace() - static_cast<double>(sym_dim(n, d)));
}

double almost_power_symmetric(Rng& rng) {
  const Index d = 2, n = pick(rng, 2, 6), R = pick(rng, 0, std::min<Index>(n, 3));
  AlmostPowerSpec spec;
  spec.base = random_pure(SystemShape{d}, rng);
  spec.n = n;
  spec.R = R;
  spec.betas = ginibre(R + 1, 1, rng).col(0);
  spec.betas.normalize();
  const Matrix q = Matrix::Identity(d, d) - spec.base.amplitudes() * spec.base.amplitudes().adjoint();
  spec.orth_components.push_back(spec.base);
  for (Index r = 1; r <= R; ++r) {
    const Vector v = apply_local(ginibre(Index(std::pow(d, r)), 1, rng).col(0), q, d, r);
    spec.orth_components.push_back(Pure::normalized(SystemShape::uniform(d, r), v));
  }
  return -symmetric_residual(build_almost_power(spec));
}

double twirl_invariant(Rng& rng) {
  const Index d = pick(rng, 2, 3), n = pick(rng, 2, d == 2 ? 5 : 3);
  return -permutation_residual(twirl(random_hermitian(SystemShape::uniform(d, n), rng)));
}

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = {
      {"opalg", "channel_positive_part", 1e-9, channel_positive_part},
      {"opalg", "partial_trace_monotone", 1e-9, partial_trace_monotone},
      {"opalg", "log_monotone", 1e-8, log_monotone},
      {"opalg", "trace_distance_inequality", 1e-10, trace_distance_inequality},
      {"opalg", "dominated_state", 1e-8, dominated_state_check},
      {"opalg", "positive_part_idempotent", 1e-10, positive_part_idempotent},
      {"opalg", "trace_norm_triangle", 1e-10, trace_norm_triangle},
      {"entropy", "entropy_continuity", 1e-8, entropy_continuity},
      {"entropy", "relent_continuity", 1e-8, relent_continuity},
      {"entropy", "relent_upper_bound", 1e-9, relent_upper},
      {"entropy", "dominance_relent", 1e-9, dominance_relent},
      {"entropy", "joint_convexity", 1e-9, joint_convexity},
      {"entropy", "additivity", 1e-8, additivity},
      {"entropy", "classical_agreement", 1e-10, classical_agreement},
      {"optim", "weak_duality", 1e-6, weak_duality},
      {"optim", "classical_duality", 1e-4, classical_duality},
      {"optim", "relent_diagonal", 1e-6, relent_diagonal},
      {"optim", "positive_part_monotone", 1e-8, positive_part_monotone},
      {"optim", "robustness_certified", 1e-8, robustness_certified},
      {"symmetry", "projector_idempotent", 1e-10, projector_idempotent},
      {"symmetry", "projector_trace", 1e-8, projector_trace},
      {"symmetry", "almost_power_symmetric", 1e-10, almost_power_symmetric},
      {"symmetry", "twirl_invariant", 1e-10, twirl_invariant},
  };
  return checks;
}

std::uint32_t fnv1a(const std::string& s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char ch : s) h = (h ^ ch) * 16777619u;
  return h;
}

const Check& find_check(const std::string& suite, const std::string& name) {
  for (const auto& c : registry())
    if (suite == c.suite && name == c.name) return c;
  fail(ErrorKind::DomainViolation, "unknown check " + suite + "/" + name);
}

}  // namespace

std::vector<std::string> verify_suites() { return {"opalg", "entropy", "optim", "symmetry"}; }

std::vector<std::string> verify_checks(const std::string& suite) {
  std::vector<std::string> out;
  for (const auto& c : registry())
    if (suite == c.suite) out.emplace_back(c.name);
  if (out.empty()) fail(ErrorKind::DomainViolation, "unknown suite '" + suite + "'");
  return out;
}

std::vector<VerifyRow> run_verify_check(const std::string& suite, const std::string& check, int trials,
                                        std::uint64_t seed, std::optional<double> tol) {
  const Check& c = find_check(suite, check);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    fnv1a(suite + "/" + check)};
  Rng rng(seq);
  const double t = tol.value_or(c.tolerance);
  std::vector<VerifyRow> rows;
  for (int k = 0; k < trials; ++k) {
    double m;
    std::string detail;
    try {
      m = c.run(rng);
    } catch (const Error& e) {
      m = -std::numeric_limits<double>::infinity();
      detail = e.what();
      std::replace(detail.begin(), detail.end(), ',', ';');
    }
    rows.push_back({c.suite, c.name, k, m, t, m >= -t, detail});
  }
  return rows;
}

std::vector<VerifyRow> run_verify_suite(const std::string& suite, int trials, std::uint64_t seed,
                                        std::optional<double> tol) {
  std::vector<VerifyRow> rows;
  for (const auto& name : verify_checks(suite)) {
    auto r = run_verify_check(suite, name, trials, seed, tol);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

void write_verify_csv(std::ostream& os, const std::vector<VerifyRow>& rows) {
  os << "suite,check,trial,margin,tolerance,pass,detail\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.suite << ',' << r.check << ',' << r.trial << ',';
    std::snprintf(buf, sizeof buf, "%.12g", r.margin);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.12g", r.tolerance);
    os << buf << ',' << (r.pass ? 1 : 0) << ',' << r.detail << '\n';
  }
}

}  // namespace stein::cli
