#include "stein/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "stein/entropy.hpp"
#include "stein/io.hpp"
#include "stein/symmetry.hpp"

namespace stein {

void write_certificates_csv(std::ostream& os, const std::vector<Certificate>& cs) {
  os << "name,margin,tolerance,pass\n";
  char buf[64];
  for (const auto& c : cs) {
    os << c.name << ',';
    std::snprintf(buf, sizeof buf, "%.12g", c.margin);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.12g", c.tolerance);
    os << buf << ',' << (c.pass ? "true" : "false") << '\n';
  }
}

namespace {

void require(PipelineTrace& t, Certificate c) {
  t.certificates.push_back(c);
  if (!c.pass) fail(ErrorKind::CertificateFailed, c.name + " failed with margin " + std::to_string(c.margin));
}

Index ipow(Index b, Index e) {
  Index r = 1;
  for (Index k = 0; k < e; ++k) r *= b;
  return r;
}

// Tr_E Tr_{1..R} of |v><v| for v on n factors of S (x) E
Density trace_env(const Pure& v, Index d, Index n, Index R) {
  const Pure fine(SystemShape::uniform(d, 2 * n), v.amplitudes(), 1e-9);
  std::vector<Index> traced;
  for (Index k = 0; k < n; ++k) {
    if (k < R) traced.push_back(2 * k);
    traced.push_back(2 * k + 1);
  }
  return reduced_state(fine, traced);
}

}  // namespace

Schedule mr_schedule(Index N) {
  if (N < 4) fail(ErrorKind::DomainViolation, "schedule needs N >= 4");
  Index m = 0;
  while (m * m * m < N * N) ++m;
  Schedule s{N, m, m};
  while (s.R > 0 && N - s.M < 2 * s.R) --s.R;
  if (N - s.M < 2 * s.R) fail(ErrorKind::Infeasible, "no schedule satisfies N - M >= 2R");
  return s;
}

DominatedState dominated_state(const Density& rho, const Operator& X, const Operator& delta, double tol) {
  if (X.shape() != rho.shape() || delta.shape() != rho.shape()) fail(ErrorKind::DimensionMismatch, "dominated_state shapes differ");
  const double td = delta.trace();
  const Operator sum = X + delta;
  if (lambda_min(Operator(sum - rho.op())) < -1e-9) fail(ErrorKind::PremiseFailed, "rho <= X + Delta fails");
  if (!(td < 1.0)) fail(ErrorKind::PremiseFailed, "Tr Delta must be < 1");

  const auto ss = eigh(sum);
  const double cut = support_cutoff<double>(ss.values);
  const RealVector isq = ss.values.unaryExpr([cut](double x) { return x > cut ? 1.0 / std::sqrt(x) : 0.0; });
  const Matrix t = sqrt_psd(X).matrix() * reconstruct(ss, isq);
  const Matrix m = t * rho.matrix() * t.adjoint();
  const double tr = m.trace().real();
  if (!(tr > 0.0)) fail(ErrorKind::ConstructionFailed, "T rho T^dagger vanishes");

  DominatedState out;
  out.state = Density::assume_valid(Operator(rho.shape(), m / tr));
  const double keep = 1.0 - td;
  out.op_cert = make_certificate("dominated_state_operator", lambda_min(Operator(X / keep - out.state.op())), tol);
  out.fidelity_cert = make_certificate("dominated_state_fidelity", fidelity(out.state.op(), rho.op()) - keep, tol);
  if (!out.op_cert.pass || !out.fidelity_cert.pass)
    fail(ErrorKind::ConstructionFailed, "dominated state violates a conclusion (margins " +
                                            std::to_string(out.op_cert.margin) + ", " +
                                            std::to_string(out.fidelity_cert.margin) + ")");
  return out;
}

double epsilon_n(Index N, Index M, Index R, double y, double mu) {
  const double n = static_cast<double>(N);
  const double a = 2.0 * std::sqrt(2.0) / (mu * std::exp(static_cast<double>(M * R) / (2.0 * n)));
  const double b = 2.0 * std::sqrt(2.0 * static_cast<double>(R)) / n;
  return 2.0 * mu * mu * mu / std::exp2(y * n) * (a + b);
}

void step1(PipelineTrace& t, const Density& rho, double y, Index N, const FreeFamily& f_in, const SolverSettings& s) {
  if (!(y > 0.0)) fail(ErrorKind::DomainViolation, "y must be > 0");
  if (N < 1) fail(ErrorKind::DomainViolation, "N must be >= 1");
  const FreeFamily f = f_in.with_copies(N);
  if (f.base_dim() != rho.dim()) fail(ErrorKind::DimensionMismatch, "family and state dimensions differ");
  t.rho = Density::assume_valid(Operator::from_hermitian(SystemShape({rho.dim()}), rho.matrix()));
  t.y = y;
  t.N = N;
  const Density rn = tensor_power(t.rho, N);
  const double b = std::exp2(y * static_cast<double>(N));
  SolverSettings ss = s;
  ss.symmetrize = true;
  const OptResult opt = min_positive_part(rn, b, f, ss);
  t.value = opt.value;
  t.fw_gap = opt.fw_gap;
  if (!(opt.value > kPremiseWindow && opt.value < 1.0 - kPremiseWindow))
    fail(ErrorKind::PremiseOutOfInterval, "minimized value " + std::to_string(opt.value) + " outside (1e-4, 1-1e-4)");

  t.sigma_N = twirl(opt.minimizer);
  const Operator X = t.sigma_N.op() * b;
  const Operator delta = positive_part(Operator(rn.op() - X));
  t.mu_N = 1.0 - delta.trace();
  const DominatedState dom = dominated_state(rn, X, delta);
  t.rho_N = twirl(dom.state);
  require(t, dom.op_cert);
  require(t, dom.fidelity_cert);
  require(t, make_certificate("step1_ineq", lambda_min(Operator(X / t.mu_N - t.rho_N.op())), kCertTolerance));
  require(t, make_certificate("step1_fidelity", fidelity(t.rho_N.op(), rn.op()) - t.mu_N, kCertTolerance));
  require(t, make_certificate("step1_symmetry",
                              -std::max(permutation_residual(t.sigma_N.op()), permutation_residual(t.rho_N.op())),
                              kCertTolerance));
}

PipelineTrace step1(const Density& rho, double y, Index N, const FreeFamily& f, const SolverSettings& s) {
  PipelineTrace t;
  step1(t, rho, y, N, f, s);
  return t;
}

void step2(PipelineTrace& t, const Schedule& sch, std::uint64_t seed) {
  if (t.N == 0 || t.mu_N <= 0) fail(ErrorKind::PremiseFailed, "step2 needs a completed step1");
  if (!all_pass(t.certificates)) fail(ErrorKind::PremiseFailed, "step1 certificates do not pass");
  const Index N = t.N, M = sch.M, R = sch.R;
  if (sch.N != N || M < 0 || R < 0 || N - M < 2 * R) fail(ErrorKind::PremiseFailed, "schedule must satisfy N - M >= 2R");
  t.schedule = sch;
  const Index d = t.rho.dim();
  const Index n = N - M, k = N - M - R;
  if (k < 1) fail(ErrorKind::DomainViolation, "schedule leaves no subsystem");
  const double mu = t.mu_N;
  const double Nd = static_cast<double>(N);
  const double h = binary_entropy(static_cast<double>(R) / static_cast<double>(n));
  const double a = 2.0 * std::sqrt(2.0) / (mu * std::exp(static_cast<double>(M * R) / (2.0 * Nd)));
  const double bb = 2.0 * std::sqrt(2.0 * static_cast<double>(R)) / Nd;
  t.eps_N = epsilon_n(N, M, R, t.y, mu);
  t.c_N = t.eps_N * std::exp2(t.y * Nd) / (2.0 * mu);

  const Density rk = tensor_power(t.rho, k);
  std::vector<Index> head = first_subsystems(M + R);
  const Density rho_marg = partial_trace(t.rho_N, head);
  const double pref = std::exp2(Nd * h) * Nd * Nd / (mu * mu);

  if (ipow(d * d, N) <= kPurifiedDimensionCap) {
    t.reduced = false;
    const PurificationPair pp = perm_invariant_purification(t.rho, t.rho_N, seed);
    t.overlap = pp.overlap;
    require(t, make_certificate("purification_overlap", pp.overlap - mu, kCertTolerance));
    const ConditionedState cs = conditioned_state(pp.rhoN_pur, pp.rho_pur, M);
    require(t, cs.certificate);
    const Pure base(SystemShape({d * d}), pp.rho_pur.amplitudes(), 1e-9);
    const Truncation tr = truncate_to_almost_power(cs.state, base, R);
    const double bound = 2.0 * std::sqrt(2.0) / pp.overlap * std::exp(-static_cast<double>(M * R) / (2.0 * Nd));
    require(t, make_certificate("almost_power_distance", bound - tr.distance, kCertTolerance));

    const Pure d_nm = positive_direction(tr.state, cs.state, tr.state);
    {
      const Operator lhs = Operator::outer(tr.state.shape(), tr.state.amplitudes());
      const Operator rhs = reduced_state(pp.rhoN_pur, first_subsystems(M)).op() / (mu * mu) +
                           Operator::outer(d_nm.shape(), d_nm.amplitudes()) * a;
      require(t, make_certificate("non_iid_to_almost_power", lambda_min(Operator(rhs - lhs)), kCertTolerance));
    }
    const PowerInequality pw = power_inequality(tr.state, base, N, M, R);
    require(t, pw.certificate);

    const Density dt_nm = trace_env(d_nm, d, n, R);
    const Density dt_nmr = trace_env(pw.delta, d, n, R);
    t.delta_tilde = Density::assume_valid(Operator((dt_nm.op() * a + dt_nmr.op() * bb) / (a + bb)));
    require(t, make_certificate("chain_to_rho_N",
                                lambda_min(Operator((rho_marg.op() + t.delta_tilde.op() * t.c_N) * pref - rk.op())),
                                kCertTolerance));
  } else {
    t.reduced = true;
    t.overlap = fidelity(t.rho_N.op(), tensor_power(t.rho, N).op());
    const Operator x = rk.op() / pref - rho_marg.op();
    const Operator xp = positive_part(x);
    const double tp = xp.trace();
    t.delta_tilde = tp > 1e-300 ? Density::assume_valid(xp / tp) : Density::maximally_mixed(rk.shape());
    require(t, make_certificate("chain_to_rho_N", t.c_N - tp, kCertTolerance));
  }

  const Density sig_marg = partial_trace(t.sigma_N, head);
  const double e2 = t.eps_N / 2.0;
  t.sigma_tilde = Density::assume_valid(Operator((sig_marg.op() + t.delta_tilde.op() * e2) / (1.0 + e2)));
  const double coef = std::exp2(Nd * (t.y + h)) * Nd * Nd / (mu * mu * mu) * (1.0 + e2);
  require(t, make_certificate("operator_inequality_first_second",
                              lambda_min(Operator(t.sigma_tilde.op() * coef - rk.op())), kCertTolerance));
  const double C = 2.0 * mu * mu * (2.0 * std::sqrt(2.0) + 2.0 * std::sqrt(2.0 * static_cast<double>(R)) * mu / Nd);
  require(t, make_certificate("epsilon_order", C * std::exp2(-t.y * Nd) - t.eps_N, 1e-15));
}

Certificate relent_bound_certificate(PipelineTrace& t, const Schedule& sch) {
  if (t.sigma_tilde.dim() == 0) fail(ErrorKind::PremiseFailed, "relent bound needs step2");
  const Index n = sch.N - sch.M, k = n - sch.R;
  const double Nd = static_cast<double>(sch.N);
  const double h = binary_entropy(static_cast<double>(sch.R) / static_cast<double>(n));
  const double bound = Nd * (t.y + h) + std::log2(Nd * Nd / std::pow(t.mu_N, 3)) + std::log2(1.0 + t.eps_N / 2.0);
  const auto d = relative_entropy(tensor_power(t.rho, k), t.sigma_tilde);
  const double margin = d.finite() ? bound - d.value : -std::numeric_limits<double>::infinity();
  const Certificate c = make_certificate("relent_bound", margin, kCertTolerance);
  require(t, c);
  return c;
}

Certificate asym_free_certificate(PipelineTrace& t, const Schedule& sch, const FreeFamily& f, const SolverSettings& s) {
  if (t.sigma_tilde.dim() == 0) fail(ErrorKind::PremiseFailed, "asymptotic freeness needs step2");
  const Index k = sch.N - sch.M - sch.R;
  const FreeFamily fk = f.with_copies(k);
  std::optional<Density> start;
  if (t.sigma_N.dim() > 0) start = partial_trace(t.sigma_N, first_subsystems(sch.M + sch.R));
  const OptResult r = distance_to_family(t.sigma_tilde, fk, s, start);
  const Certificate c = make_certificate("asymptotically_free", t.eps_N + 1e-6 - r.value, kCertTolerance);
  require(t, c);
  return c;
}

SandwichReport finite_n_sandwich(const Density& rho_in, const FreeFamily& f, Index N, double eps, const SolverSettings& s) {
  if (!(eps > 0.0)) fail(ErrorKind::DomainViolation, "epsilon must be > 0");
  if (N < 1) fail(ErrorKind::DomainViolation, "N must be >= 1");
  const Density rho = Density::assume_valid(Operator::from_hermitian(SystemShape({rho_in.dim()}), rho_in.matrix()));
  const FreeFamily fn = f.with_copies(N);
  const double lmin = lambda_min(full_rank_witness(f.with_copies(1)).op());
  if (!(lmin > 0.0 && lmin < 1.0 + 1e-12)) fail(ErrorKind::NoFullRankMember, "witness minimum eigenvalue unusable");
  const double lm = std::min(lmin, 1.0 - 1e-15);
  const Density rn = tensor_power(rho, N);
  SolverSettings ss = s;
  ss.symmetrize = true;
  const OptResult rr = rel_ent_of_resource(rn, fn, ss);

  SandwichReport rep;
  rep.N = N;
  rep.epsilon = eps;
  rep.relent = rr.value;
  rep.upper = rr.value;
  const double e2 = eps / 2.0;
  const Density pert = Density::assume_valid(Operator((rr.minimizer.op() + rn.op() * e2) / (1.0 + e2)));
  const auto dp = relative_entropy(rn, pert);
  rep.middle = std::min(rr.value, dp.finite() ? dp.value : rr.value);

  const double Nd = static_cast<double>(N);
  const double l1 = Nd * std::log2(1.0 / lm);
  const double cont = 3.0 * std::pow(std::log2((1.0 + 2.0 * eps) / eps) + l1, 2) * std::sqrt(eps) /
                      (1.0 - eps * std::pow(lm, Nd) / (2.0 * (1.0 + 2.0 * eps)));
  rep.lower = rr.value - cont * (1.0 + 2.0 * eps) - 2.0 * eps * (l1 + 1.0);
  rep.upper_cert = make_certificate("sandwich_upper", (rep.upper - rep.middle) / Nd, kCertTolerance);
  rep.lower_cert = make_certificate("sandwich_lower", (rep.middle - rep.lower) / Nd, kCertTolerance);
  return rep;
}

void save_trace(const PipelineTrace& t, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const Density& d) {
    if (d.dim() > 0) save_operator(dir / name, d.op());
  };
  put("rho.txt", t.rho);
  put("sigma_N.txt", t.sigma_N);
  put("rho_N.txt", t.rho_N);
  put("sigma_tilde.txt", t.sigma_tilde);
  put("delta_tilde.txt", t.delta_tilde);
  std::ofstream cs(dir / "certificates.csv");
  write_certificates_csv(cs, t.certificates);
  std::ofstream sm(dir / "summary.txt");
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "y = %.12g\nN = %lld\nM = %lld\nR = %lld\nvalue = %.12g\nfw_gap = %.12g\nmu_N = %.12g\noverlap = %.12g\n"
                "eps_N = %.12g\nc_N = %.12g\nmode = %s\n",
                t.y, static_cast<long long>(t.N), static_cast<long long>(t.schedule.M),
                static_cast<long long>(t.schedule.R), t.value, t.fw_gap, t.mu_N, t.overlap, t.eps_N, t.c_N,
                t.reduced ? "reduced" : "full");
  sm << buf;
}

}  // namespace stein
