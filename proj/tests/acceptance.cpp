// Acceptance checks; one line per criterion: "criterion <k> PASS|FAIL <seconds>s <details>".

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stein/cli.hpp"
#include "stein/entropy.hpp"
#include "stein/pipeline.hpp"
#include "stein/random.hpp"
#include "stein/symmetry.hpp"

using namespace stein;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += (ok ? "" : "FAILED ") + what;
}

double binom(Index n, Index k) {
  double b = 1;
  for (Index j = 1; j <= k; ++j) b = b * static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

Density coherence(double p) {
  Vector v(2);
  v << std::sqrt(p), std::sqrt(1.0 - p);
  return Density(Pure(SystemShape{2}, v));
}

// ---- criterion 1 --------------------------------------------------------------------

// Tr[(diag(.75,.25)^N - 2^{yN} (I/2)^N)_+] by summing over Hamming weights
double classical_oracle(Index N, double y) {
  const double thr = std::exp2(y * static_cast<double>(N) - static_cast<double>(N));
  double total = 0;
  for (Index k = 0; k <= N; ++k) {
    const double p = std::pow(0.75, static_cast<double>(N - k)) * std::pow(0.25, static_cast<double>(k));
    total += binom(N, k) * std::max(0.0, p - thr);
  }
  return total;
}

Outcome criterion1() {
  Outcome o;
  const Density rho = cli::make_state("classical:0.75");
  std::vector<Index> Ns;
  for (Index n = 1; n <= 10; ++n) Ns.push_back(n);
  std::vector<double> ys;
  for (int k = 1; k <= 8; ++k) ys.push_back(0.05 * k);
  const auto rows = cli::exponent_curve(rho, "iid:mixed", Ns, ys, SolverSettings{}, 1);
  double worst = 0, e10a = -1, e10b = -1;
  for (const auto& r : rows) {
    worst = std::max(worst, std::abs(r.e - classical_oracle(r.N, r.y)));
    if (r.N == 10 && std::abs(r.y - 0.10) < 1e-12) e10a = r.e;
    if (r.N == 10 && std::abs(r.y - 0.30) < 1e-12) e10b = r.e;
  }
  const double kl = 0.75 * std::log2(1.5) + 0.25 * std::log2(0.5);
  note(o, std::abs(kl - 0.188722) < 1e-6, "KL = " + fmt("%.6f", kl));
  note(o, worst <= 1e-6, "max |e - binomial oracle| = " + fmt("%.2e", worst));
  note(o, e10a >= 0.6, "e_10(0.10) = " + fmt("%.6f", e10a) + " >= 0.6");
  note(o, e10b <= 0.2, "e_10(0.30) = " + fmt("%.6f", e10b) + " <= 0.2");
  return o;
}

// ---- criterion 2 --------------------------------------------------------------------

// min over diagonal sigma of Tr[(|t><t|^{(x)N} - b sigma)_+] for a pure qubit |t>.
// The positive part has rank <= 1; its eigenvalue lambda solves sum_x w_x / (lambda + b s_x) = 1,
// and the best s for a given lambda follows from water filling over the weights w_x.
double coherence_oracle(double p, Index N, double y) {
  const double b = std::exp2(y * static_cast<double>(N));
  std::vector<double> w, m;
  for (Index k = 0; k <= N; ++k) {
    w.push_back(std::pow(p, static_cast<double>(N - k)) * std::pow(1 - p, static_cast<double>(k)));
    m.push_back(binom(N, k));
  }
  // min over the simplex of sum m_k w_k / (lambda + b s_k), s_k per element of class k
  auto g = [&](double lam) {
    auto mass = [&](double nu) {
      double t = 0;
      for (std::size_t k = 0; k < w.size(); ++k) t += m[k] * std::max(0.0, (std::sqrt(w[k] / nu) - lam) / b);
      return t;
    };
    double lo = 1e-300, hi = 1e300;
    for (int it = 0; it < 3000 && hi / lo > 1 + 1e-15; ++it) {
      const double mid = std::sqrt(lo * hi);
      (mass(mid) > 1.0 ? lo : hi) = mid;
    }
    double v = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double s = std::max(0.0, (std::sqrt(w[k] / hi) - lam) / b);
      v += m[k] * w[k] / (lam + b * s);
    }
    return v;
  };
  double sq = 0;
  for (std::size_t k = 0; k < w.size(); ++k) sq += m[k] * std::sqrt(w[k]);
  if (sq * sq <= b) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

Outcome criterion2() {
  Outcome o;
  const double R = binary_entropy(0.8);
  const Density rho = coherence(0.8);
  const std::vector<double> ys = {R - 0.25, R - 0.125, R, R + 0.125, R + 0.25};
  std::vector<Index> Ns;
  for (Index n = 1; n <= 8; ++n) Ns.push_back(n);
  const auto rows = cli::exponent_curve(rho, "diagonal", Ns, ys, SolverSettings{}, 1);
  const auto viol = cli::check_monotone(rows);
  note(o, viol.empty(), std::to_string(viol.size()) + " monotonicity violations over N <= 8");

  double worst = 0;
  auto at = [&](Index N, double y) {
    for (const auto& r : rows)
      if (r.N == N && std::abs(r.y - y) < 1e-12) return r;
    return cli::ExponentRow{};
  };
  for (const auto& r : rows)
    if (r.N <= 4) worst = std::max(worst, std::abs(r.e - coherence_oracle(0.8, r.N, r.y)));
  note(o, worst <= 1e-4, "max |e - oracle| at N <= 4 = " + fmt("%.2e", worst));

  // values within the certified gap of zero count as zero
  auto eff = [&](const cli::ExponentRow& r) { return r.e <= r.gap ? 0.0 : r.e; };
  const double hi = R + 0.25, lo = R - 0.25;
  const double d8 = eff(at(8, hi)), d4 = eff(at(4, hi)), d2 = eff(at(2, hi));
  note(o, d8 < d4 && d4 < d2,
       "e_8(R+.25) = " + fmt("%.3g", d8) + " < e_4 = " + fmt("%.3g", d4) + " < e_2 = " + fmt("%.3g", d2));
  const double c8 = eff(at(8, lo)), c4 = eff(at(4, lo));
  note(o, c8 > c4, "e_8(R-.25) = " + fmt("%.6f", c8) + " > e_4(R-.25) = " + fmt("%.6f", c4));
  return o;
}

// ---- criterion 3 --------------------------------------------------------------------

Outcome criterion3() {
  Outcome o;
  Rng rng(2024);
  SolverSettings s;
  s.tol = 1e-9;
  s.max_iters = 4000;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const Density r = random_density(SystemShape{2}, rng);
    const RealVector dg = r.matrix().diagonal().real();
    const double oracle = von_neumann_entropy(Density::diagonal(SystemShape{2}, dg)) - von_neumann_entropy(r);
    worst = std::max(worst, std::abs(rel_ent_of_resource(r, FreeFamily::diagonal(2, 1), s).value - oracle));
  }
  note(o, worst <= 1e-6, "100 qubits, max |R_R - closed form| = " + fmt("%.2e", worst));

  const double bell = rel_ent_of_resource(cli::make_state("bell"), FreeFamily::separable_hull(2, 2, 1), SolverSettings{}).value;
  note(o, std::abs(bell - 1.0) <= 1e-3, "R_R(Bell) = " + fmt("%.6f", bell));

  const Density plus = coherence(0.5);
  const double rob = generalized_robustness(plus, FreeFamily::diagonal(2, 1), SolverSettings{});
  // grid over diagonal sigma = diag(q, 1 - q): smallest t with t sigma >= rho, minus one
  double grid = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 100000; ++k) {
    const double q = k / 100000.0;
    RealVector d(2);
    d << 1 / std::sqrt(q), 1 / std::sqrt(1 - q);
    const Matrix m = d.cast<std::complex<double>>().asDiagonal() * plus.matrix() * d.cast<std::complex<double>>().asDiagonal();
    grid = std::min(grid, lambda_max(Operator(SystemShape{2}, m)) - 1.0);
  }
  note(o, std::abs(rob - 1.0) <= 1e-4 && std::abs(rob - grid) <= 1e-4,
       "R_G(|+>) = " + fmt("%.6f", rob) + ", grid " + fmt("%.6f", grid));
  return o;
}

// ---- criterion 4 --------------------------------------------------------------------

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

Outcome criterion4() {
  Outcome o;
  const double Ks[] = {2.0, 4.0, 8.0};
  Rng rng(99);
  std::uniform_int_distribution<int> dim(2, 6), kpick(0, 2), coin(0, 2);
  SolverSettings s;

  double worst_c = 0;
  for (int t = 0; t < 50; ++t) {
    const Index d = dim(rng);
    const double K = Ks[kpick(rng)];
    const RealVector p = random_probability(d, rng);
    const Density eta = Density::diagonal(SystemShape{d}, p);
    double exact;
    FreeFamily f;
    if (coin(rng) == 0) {
      f = FreeFamily::diagonal(d, 1);
      exact = 1.0 / K;
    } else {
      const RealVector q = random_probability(d, rng);
      f = FreeFamily::singleton_iid(Density::diagonal(SystemShape{d}, q), 1);
      exact = knapsack(p, q, 1.0 / K);
    }
    const PrimalResult r = hypothesis_primal_solve(eta, K, f, s);
    worst_c = std::max({worst_c, std::abs(r.value - exact), std::abs(r.dual.value - exact)});
  }
  note(o, worst_c <= 1e-4, "50 commuting, max |primal or dual - exact| = " + fmt("%.2e", worst_c));

  double worst_w = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const Index d = dim(rng);
    const double K = Ks[kpick(rng)];
    const Density eta = random_density(SystemShape{d}, rng);
    FreeFamily f;
    switch (coin(rng)) {
      case 0: f = FreeFamily::diagonal(d, 1); break;
      case 1: f = FreeFamily::full_space(d, 1); break;
      default: f = FreeFamily::singleton_iid(random_density(SystemShape{d}, rng), 1);
    }
    const PrimalResult r = hypothesis_primal_solve(eta, K, f, s);
    worst_w = std::min(worst_w, r.dual.value - r.value);
  }
  note(o, worst_w >= -1e-6, "100 non-commuting, min (dual - primal) = " + fmt("%.2e", worst_w));
  return o;
}

// ---- criterion 5 --------------------------------------------------------------------

Outcome criterion5() {
  Outcome o;
  for (const std::string suite : {"opalg", "entropy", "symmetry"}) {
    const auto rows = cli::run_verify_suite(suite, 500, 7, 1e-8);
    int bad = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      bad += !r.pass;
      worst = std::min(worst, r.margin);
    }
    note(o, bad == 0, suite + ": " + std::to_string(rows.size()) + " trials, " + std::to_string(bad) +
                          " violations, worst margin " + fmt("%.2e", worst));
  }
  return o;
}

// ---- criterion 6 --------------------------------------------------------------------

const Certificate* find(const PipelineTrace& t, const std::string& name) {
  for (const auto& c : t.certificates)
    if (c.name == name) return &c;
  return nullptr;
}

Outcome criterion6() {
  Outcome o;
  bool dims_ok = true;
  for (Index n = 1; n <= 6; ++n)
    for (Index d = 2; d <= 4 && std::pow(d, n) <= 4096; ++d) {
      const double tr = sym_projector(n, d).trace();
      dims_ok = dims_ok && std::abs(tr - std::round(tr)) < 1e-9 && std::lround(tr) == sym_dim(n, d) &&
                sym_dim(n, d) == static_cast<Index>(std::llround(binom(n + d - 1, n)));
    }
  note(o, dims_ok, "trace of projector = binomial = sym_dim for N <= 6, d <= 4");

  const double y = binary_entropy(0.8);
  double dist_m = 1e300, ineq_m = 1e300, pow_m = 1e300;
  for (Index N = 4; N <= 6; ++N) {
    PipelineTrace t = step1(coherence(0.8), y, N, FreeFamily::diagonal(2, 1), SolverSettings{});
    step2(t, mr_schedule(N));
    const Certificate *a = find(t, "almost_power_distance"), *b = find(t, "non_iid_to_almost_power"),
                      *c = find(t, "power_inequality");
    if (!a || !b || !c) {
      note(o, false, "N = " + std::to_string(N) + " missing certificates");
      continue;
    }
    dist_m = std::min(dist_m, a->margin);
    ineq_m = std::min(ineq_m, b->margin);
    pow_m = std::min(pow_m, c->margin);
  }
  note(o, dist_m >= -1e-8, "truncation distance bound, min margin " + fmt("%.2e", dist_m));
  note(o, ineq_m >= -1e-8, "truncation operator inequality, min margin " + fmt("%.2e", ineq_m));
  note(o, pow_m >= -1e-8, "power inequality, min margin " + fmt("%.2e", pow_m));
  return o;
}

// ---- criterion 7 --------------------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  const double y = binary_entropy(0.8);
  const Index N = 6;
  const FreeFamily f = FreeFamily::diagonal(2, 1);
  SolverSettings s;
  PipelineTrace t = step1(coherence(0.8), y, N, f, s);
  const Schedule sch = mr_schedule(N);
  step2(t, sch);
  relent_bound_certificate(t, sch);
  asym_free_certificate(t, sch, f, s);
  double worst = 1e300;
  for (const auto& c : t.certificates) worst = std::min(worst, c.margin);
  note(o, worst >= -1e-8 && all_pass(t.certificates),
       std::to_string(t.certificates.size()) + " certificates, min margin " + fmt("%.2e", worst));

  const double n = static_cast<double>(N), mu = t.mu_N;
  const double M = static_cast<double>(sch.M), R = static_cast<double>(sch.R);
  const double expect = 2 * std::pow(mu, 3) * std::exp2(-y * n) *
                        (2 * std::sqrt(2.0) / mu * std::exp(-M * R / (2 * n)) + 2 * std::sqrt(2 * R) / n);
  const double rel = std::abs(t.eps_N - expect) / expect;
  note(o, rel <= 1e-12, "eps_N = " + fmt("%.12e", t.eps_N) + ", rel. error " + fmt("%.1e", rel));

  const SandwichReport sw = finite_n_sandwich(coherence(0.8), f, 3, 1e-4, s);
  note(o, sw.upper_cert.pass && sw.lower_cert.pass,
       "sandwich at N = 3: margins " + fmt("%.3e", sw.upper_cert.margin) + ", " + fmt("%.3e", sw.lower_cert.margin));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> all = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}};
  int failed = 0;
  for (const auto& [k, fn] : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s %.2fs  %s\n", k, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
