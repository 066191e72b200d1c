#include "stein/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stein/entropy.hpp"

namespace stein {

namespace {

void check_family(const FreeFamily& f, const Operator& a, const char* what) {
  if (a.shape().total_dim() != f.total_dim() || (a.shape() != f.shape() && a.shape().subsystems() != 1))
    fail(ErrorKind::DimensionMismatch, std::string(what) + " shape [" + a.shape().str() + "] differs from " + f.describe());
}

Density on_family(const Density& a, const FreeFamily& f) {
  if (a.shape() == f.shape()) return a;
  return Density::assume_valid(Operator::from_hermitian(f.shape(), a.matrix()));
}

OptResult point_result(const Density& sigma, double value) {
  OptResult r;
  r.value = value;
  r.minimizer = sigma;
  r.converged = true;
  return r;
}

// max over f of Tr[E sigma] with its maximiser
std::pair<double, Density> worst_free(const FreeFamily& f, const Operator& e, std::uint64_t seed) {
  const Density s = linear_min_oracle(f, -e, seed);
  return {inner(e, s.op()), s};
}

}  // namespace

OptResult min_positive_part(const Density& rho_in, double b, const FreeFamily& f, const SolverSettings& s,
                            const std::optional<Density>& start) {
  validate(s);
  check_family(f, rho_in.op(), "rho");
  if (!(b >= 0.0) || !std::isfinite(b)) fail(ErrorKind::DomainViolation, "b must be finite and >= 0");
  const Density rho = on_family(rho_in, f);
  if (b == 0.0) return point_result(start ? on_family(*start, f) : some_member(f), positive_part_trace(rho.op()));
  if (f.kind() == FamilyKind::FullSpace) return point_result(rho, std::max(0.0, 1.0 - b));
  if (f.kind() == FamilyKind::SingletonIid) {
    const Density sig = some_member(f);
    return point_result(sig, positive_part_trace(Operator(rho.op() - sig.op() * b)));
  }
  std::optional<Density> st;
  if (start) st = on_family(*start, f);
  const Operator r = rho.op();
  return minimize_smoothed([&](double tau) { return std::make_unique<PositivePartObjective>(r, b, tau); }, f, s, st);
}

NeymanPearsonTest neyman_pearson(const Density& eta, const Density& sigma, double b, double K, double window) {
  if (!(K > 0.0)) fail(ErrorKind::DomainViolation, "K must be > 0");
  if (eta.shape() != sigma.shape()) fail(ErrorKind::DimensionMismatch, "eta and sigma shapes differ");
  const auto sp = eigh(eta.op() - sigma.op() * b);
  const Matrix sv = sp.vectors.adjoint() * sigma.matrix() * sp.vectors;
  double above = 0, ties = 0;
  for (Index k = 0; k < sp.values.size(); ++k) {
    if (sp.values(k) > window) above += sv(k, k).real();
    else if (sp.values(k) >= -window) ties += sv(k, k).real();
  }
  const double c = ties > 1e-14 ? std::clamp((1.0 / K - above) / ties, 0.0, 1.0) : 0.0;
  RealVector w(sp.values.size());
  for (Index k = 0; k < w.size(); ++k) w(k) = sp.values(k) > window ? 1.0 : (sp.values(k) >= -window ? c : 0.0);
  NeymanPearsonTest t;
  t.test = Operator(eta.shape(), reconstruct(sp, w));
  t.acceptance = inner(t.test, eta.op());
  t.worst_free = inner(t.test, sigma.op());
  return t;
}

DualResult hypothesis_dual_solve(const Density& eta_in, double K, const FreeFamily& f, const SolverSettings& s) {
  validate(s);
  if (!(K > 0.0)) fail(ErrorKind::DomainViolation, "K must be > 0");
  check_family(f, eta_in.op(), "eta");
  const Density eta = on_family(eta_in, f);
  DualResult best;
  best.value = 1.0;  // b = 0
  best.b = 0.0;
  best.sigma = some_member(f);
  std::optional<Density> warm;
  auto phi = [&](double b) {
    const OptResult r = min_positive_part(eta, b, f, s, warm);
    warm = r.minimizer;
    const double v = r.value + b / K;
    if (v < best.value) {
      best.value = v;
      best.b = b;
      best.sigma = r.minimizer;
    }
    return v;
  };
  // golden section on the convex function b -> min_sigma Tr[(eta - b sigma)_+] + b/K
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = K;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = phi(x1), f2 = phi(x2);
  phi(K);
  for (int it = 0; it < 60 && (hi - lo) > 1e-9 * std::max(1.0, K); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = phi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = phi(x2);
    }
  }
  return best;
}

double hypothesis_dual(const Density& eta, double K, const FreeFamily& f, const SolverSettings& s) {
  return hypothesis_dual_solve(eta, K, f, s).value;
}

PrimalResult hypothesis_primal_solve(const Density& eta_in, double K, const FreeFamily& f, const SolverSettings& s) {
  validate(s);
  if (!(K > 0.0)) fail(ErrorKind::DomainViolation, "K must be > 0");
  check_family(f, eta_in.op(), "eta");
  const Density eta = on_family(eta_in, f);
  const double level = 1.0 / K;
  PrimalResult best;
  if (K <= 1.0) {
    best.test.test = Operator::identity(f.shape());
    best.test.acceptance = 1.0;
    best.test.worst_free = 1.0;
    best.value = 1.0;
    best.dual.value = 1.0;
    best.dual.sigma = some_member(f);
    return best;
  }
  best.dual.value = 1.0;
  best.dual.sigma = some_member(f);
  best.test.test = Operator::identity(f.shape()) * level;
  best.test.acceptance = level;
  best.test.worst_free = level;
  best.value = level;

  best.dual = hypothesis_dual_solve(eta, K, f, s);
  const DualResult& dual = best.dual;
  std::vector<double> windows = {0.0};
  for (double w = s.tol; w <= 1e-2; w *= 10) windows.push_back(w);
  std::uint64_t salt = 0;
  for (double w : windows) {
    NeymanPearsonTest t = neyman_pearson(eta, dual.sigma, dual.b, K, w);
    auto [worst, arg] = worst_free(f, t.test, s.seed + ++salt);
    if (worst > level) {
      t.test = t.test * (level / worst);
      t.acceptance *= level / worst;
      worst = level;
    }
    t.worst_free = worst;
    if (t.acceptance > best.value) {
      best.value = t.acceptance;
      best.test = t;
    }
  }
  const double check = worst_free(f, best.test.test, s.seed + 7919).first;
  if (check > level + s.tol) fail(ErrorKind::ConstraintUncertified, "max Tr[E sigma] = " + std::to_string(check));
  best.test.worst_free = std::max(best.test.worst_free, check);
  return best;
}

double hypothesis_primal(const Density& eta, double K, const FreeFamily& f, const SolverSettings& s) {
  return hypothesis_primal_solve(eta, K, f, s).value;
}

OptResult rel_ent_of_resource(const Density& rho_in, const FreeFamily& f, const SolverSettings& s) {
  validate(s);
  check_family(f, rho_in.op(), "rho");
  const Density rho = on_family(rho_in, f);
  const Density w = full_rank_witness(f);
  if (f.kind() == FamilyKind::SingletonIid) return point_result(w, relative_entropy(rho, w).value);
  const RelativeEntropyObjective obj(rho, w);
  OptResult r = frank_wolfe(obj, f, s, w);
  const Density sig = Density::assume_valid(obj.mixed(r.minimizer.op()));
  r.minimizer = sig;
  r.value = relative_entropy(rho, sig).value;
  return r;
}

std::vector<RegularizedPoint> regularized_sequence(const Density& rho, const FamilyBuilder& build, Index n_max,
                                                   const SolverSettings& s, Index dim_cap) {
  if (n_max < 1) fail(ErrorKind::DomainViolation, "N_max must be >= 1");
  const double total = std::pow(static_cast<double>(rho.dim()), static_cast<double>(n_max));
  if (total > static_cast<double>(dim_cap))
    fail(ErrorKind::DimensionCap, "d^N_max = " + std::to_string(total) + " exceeds " + std::to_string(dim_cap));
  std::vector<RegularizedPoint> out;
  Density rn = rho;
  for (Index n = 1; n <= n_max; ++n) {
    if (n > 1) rn = tensor(rn, rho);
    const FreeFamily f = build(n);
    const OptResult r = rel_ent_of_resource(rn, f, s);
    out.push_back({n, r.value / static_cast<double>(n), r.fw_gap / static_cast<double>(n)});
  }
  return out;
}

RobustnessResult generalized_robustness_solve(const Density& rho_in, const FreeFamily& f, const SolverSettings& s) {
  validate(s);
  check_family(f, rho_in.op(), "rho");
  const Density rho = on_family(rho_in, f);
  const Density w = full_rank_witness(f);

  // rho <= lambda_max(w^{-1/2} rho w^{-1/2}) w
  const auto ws = eigh(w.op());
  const RealVector inv = ws.values.cwiseInverse().cwiseSqrt();
  const Matrix wi = ws.vectors * inv.cast<std::complex<double>>().asDiagonal() * ws.vectors.adjoint();
  const double top = lambda_max(Operator(f.shape(), wi * rho.matrix() * wi));

  RobustnessResult out;
  out.sigma = w;
  out.value = std::max(0.0, top - 1.0);
  out.lower = 0.0;
  if (f.kind() == FamilyKind::SingletonIid) {
    out.lower = out.value;
    out.margin = lambda_min(Operator(w.op() * (1.0 + out.value) - rho.op()));
    return out;
  }
  SolverSettings fs = s;
  fs.tol = std::min(s.tol, 1e-9);
  fs.stop_if_lower_above = 0.0;
  fs.stop_if_upper_below = 1e-10;
  fs.max_iters = std::min(s.max_iters, 500);
  std::optional<Density> warm = w;
  enum class Verdict { Feasible, Infeasible, Undecided };
  auto probe = [&](double sv, Density& sig) {
    const double b = 1.0 + sv;
    const OptResult r = min_positive_part(rho, b, f, fs, warm);
    warm = r.minimizer;
    if (lambda_max(Operator(rho.op() - r.minimizer.op() * b)) <= 1e-9) {
      sig = r.minimizer;
      return Verdict::Feasible;
    }
    return r.value - r.fw_gap > 0.0 ? Verdict::Infeasible : Verdict::Undecided;
  };
  Density sig;
  if (probe(0.0, sig) == Verdict::Feasible) {
    out.value = 0.0;
    out.sigma = sig;
  } else {
    // undecided probes move the bracket but not the certified lower bound
    double lo = 0.0, hi = out.value, certified = 0.0;
    int undecided = 0;
    while (hi - lo > 1e-7 && undecided < 4) {
      const double mid = 0.5 * (lo + hi);
      const Verdict v = probe(mid, sig);
      if (v == Verdict::Feasible) {
        hi = mid;
        out.sigma = sig;
      } else {
        lo = mid;
        if (v == Verdict::Infeasible) certified = mid;
        else ++undecided;
      }
    }
    out.value = hi;
    out.lower = certified;
  }
  out.margin = lambda_min(Operator(out.sigma.op() * (1.0 + out.value) - rho.op()));
  return out;
}

double generalized_robustness(const Density& rho, const FreeFamily& f, const SolverSettings& s) {
  return generalized_robustness_solve(rho, f, s).value;
}

OptResult distance_to_family(const Density& target_in, const FreeFamily& f, const SolverSettings& s,
                             const std::optional<Density>& start) {
  validate(s);
  check_family(f, target_in.op(), "target");
  const Density target = on_family(target_in, f);
  if (f.kind() == FamilyKind::SingletonIid) {
    const Density m = some_member(f);
    return point_result(m, trace_norm(Operator(target.op() - m.op())));
  }
  std::optional<Density> st;
  if (start) st = on_family(*start, f);
  const Operator t = target.op();
  return minimize_smoothed([&](double tau) { return std::make_unique<TraceDistanceObjective>(t, tau); }, f, s, st);
}

}  // namespace stein
