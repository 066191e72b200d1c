#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "stein/cli.hpp"
#include "stein/pipeline.hpp"

namespace stein::cli {

namespace {

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Runs fn(i) for i in [0, n) on a pool; the first exception in index order is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto k = static_cast<std::size_t>(std::max(1, threads));
  if (k == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(k, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::PremiseOutOfInterval: return kExitPremise;
    case ErrorKind::CertificateFailed: return kExitCertificate;
    case ErrorKind::DimensionCap: return kExitDimensionCap;
    default: return kExitVerification;
  }
}

}  // namespace

std::vector<ExponentRow> exponent_curve(const Density& rho, const std::string& family, const std::vector<Index>& N_grid,
                                        const std::vector<double>& y_grid, const SolverSettings& s, int threads) {
  validate(s);
  if (N_grid.empty() || y_grid.empty()) fail(ErrorKind::DomainViolation, "empty N or y grid");
  const Density single = Density::assume_valid(Operator::from_hermitian(SystemShape{rho.dim()}, rho.matrix()));
  std::map<Index, Density> powers;
  for (Index n : N_grid) {
    if (std::pow(static_cast<double>(rho.dim()), static_cast<double>(n)) > 4096.0)
      fail(ErrorKind::DimensionCap, "N = " + std::to_string(n) + " exceeds the dimension cap");
    if (!powers.count(n)) powers.emplace(n, tensor_power(single, n));
  }
  std::vector<ExponentRow> rows;
  for (Index n : N_grid)
    for (double y : y_grid) rows.push_back({n, y, 0.0, 0.0});
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    ExponentRow& r = rows[i];
    const FreeFamily f = make_family(family, single, r.N, s.restarts);
    SolverSettings ss = s;
    ss.symmetrize = r.N > 1;
    const double b = std::exp2(r.y * static_cast<double>(r.N));
    try {
      const OptResult o = min_positive_part(powers.at(r.N), b, f, ss);
      r.e = o.value;
      r.gap = o.fw_gap;
    } catch (const Error& e) {
      fail(e.kind(), "N = " + std::to_string(r.N) + ", y = " + fmt12(r.y) + ": " + e.what());
    }
  });
  return rows;
}

std::vector<MonotonicityViolation> check_monotone(const std::vector<ExponentRow>& rows, double slack) {
  std::map<Index, std::vector<ExponentRow>> byN;
  for (const auto& r : rows) byN[r.N].push_back(r);
  std::vector<MonotonicityViolation> out;
  for (auto& [n, rs] : byN) {
    std::stable_sort(rs.begin(), rs.end(), [](const auto& a, const auto& b) { return a.y < b.y; });
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        if (!(rs[j].y > rs[i].y)) continue;
        // the certified lower bound at the smaller y must not exceed the value at the larger one
        const double excess = rs[j].e - (rs[i].e - rs[i].gap) - rs[j].gap;
        if (excess > slack) out.push_back({n, rs[i].y, rs[j].y, excess});
      }
  }
  return out;
}

void write_exponent_csv(std::ostream& os, const std::vector<ExponentRow>& rows) {
  os << "N,y,e,gap\n";
  for (const auto& r : rows) os << r.N << ',' << fmt12(r.y) << ',' << fmt12(r.e) << ',' << fmt12(r.gap) << '\n';
}

void write_gnuplot(std::ostream& os, const std::string& csv_path, const std::vector<Index>& N_grid) {
  os << "set datafile separator ','\n"
        "set xlabel 'y'\n"
        "set ylabel 'e_N(y)'\n"
        "set yrange [0:1]\n"
        "plot";
  for (std::size_t k = 0; k < N_grid.size(); ++k)
    os << (k ? ", \\\n    " : " ") << "'" << csv_path << "' every ::1 using ($1 == " << N_grid[k]
       << " ? $2 : 1/0):3 with linespoints title 'N = " << N_grid[k] << "'";
  os << '\n';
}

int run_pipeline(const ExperimentConfig& c, double y, Index N, const PipelineOptions& opt, std::ostream& log) {
  const Density rho = make_state(c.state);
  const FreeFamily f = make_family(c.family, rho, 1, c.solver.restarts);
  PipelineTrace t;
  int code = kExitOk;
  bool premise_failed = false;
  auto save = [&] {
    if (!opt.out_dir.empty()) save_trace(t, opt.out_dir);
  };
  try {
    step1(t, rho, y, N, f, c.solver);
    log << "value " << fmt12(t.value) << "  mu_N " << fmt12(t.mu_N) << "  gap " << fmt12(t.fw_gap) << '\n';
    const Schedule sch = mr_schedule(N);
    step2(t, sch, c.solver.seed);
    log << "schedule M=" << sch.M << " R=" << sch.R << (t.reduced ? "  (reduced)" : "") << "  eps_N " << fmt12(t.eps_N)
        << '\n';
    relent_bound_certificate(t, sch);
    asym_free_certificate(t, sch, f, c.solver);
    const SandwichReport sw = finite_n_sandwich(rho, f, c.sandwich_N, c.epsilon, c.solver);
    t.certificates.push_back(sw.upper_cert);
    t.certificates.push_back(sw.lower_cert);
    if (!sw.upper_cert.pass || !sw.lower_cert.pass) code = kExitCertificate;
  } catch (const Error& e) {
    code = exit_for(e.kind());
    log << e.what() << '\n';
    premise_failed = code == kExitPremise;
    if (premise_failed && opt.expect_premise_fail) {
      log << "premise failure expected\n";
      code = kExitOk;
    }
  }
  if (code == kExitOk && opt.expect_premise_fail && !premise_failed) {
    log << "expected a premise failure but every certificate passed\n";
    code = kExitVerification;
  }
  for (const auto& cert : t.certificates)
    log << (cert.pass ? "PASS " : "FAIL ") << cert.name << "  margin " << fmt12(cert.margin) << '\n';
  save();
  return code;
}

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
  std::optional<int> restarts;
  std::optional<double> tol;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

void add_common(CLI::App* app, CommonFlags& c, bool need_config) {
  auto* opt = app->add_option("--config", c.config, "experiment config file");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output path");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--tol", c.tol, "solver tolerance");
  app->add_option("--max-iters", c.max_iters, "Frank-Wolfe iteration budget");
  app->add_option("--restarts", c.restarts, "seesaw restarts");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) c.solver.seed = *f.seed;
  if (f.tol) c.solver.tol = *f.tol;
  if (f.max_iters) c.solver.max_iters = *f.max_iters;
  if (f.restarts) c.solver.restarts = *f.restarts;
  if (!f.out.empty()) c.out = f.out;
  validate(c.solver);
  return c;
}

int cmd_exponent(const CommonFlags& flags, bool gnuplot) {
  const ExperimentConfig c = resolve(flags);
  if (c.y_grid.empty() || c.N_grid.empty()) {
    std::cerr << "config needs y_grid and N_grid\n";
    return kExitUsage;
  }
  const Density rho = make_state(c.state);
  const auto rows = exponent_curve(rho, c.family, c.N_grid, c.y_grid, c.solver, flags.threads);
  const auto bad = check_monotone(rows);
  for (const auto& v : bad)
    std::cerr << "non-monotone at N = " << v.N << ": e(" << fmt12(v.y_hi) << ") exceeds e(" << fmt12(v.y_lo)
              << ") by " << fmt12(v.excess) << '\n';
  if (!bad.empty()) return kExitVerification;
  if (c.out.empty()) {
    write_exponent_csv(std::cout, rows);
  } else {
    std::ofstream os(c.out);
    if (!os) fail(ErrorKind::ParseError, "cannot write " + c.out);
    write_exponent_csv(os, rows);
    if (gnuplot) {
      std::ofstream gp(c.out + ".gp");
      write_gnuplot(gp, c.out, c.N_grid);
    }
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, int trials, std::uint64_t seed, std::optional<double> tol,
               const std::string& out) {
  if (tol && !(*tol >= 0)) {
    std::cerr << "tolerance must be >= 0\n";
    return kExitUsage;
  }
  if (trials < 1) {
    std::cerr << "trials must be >= 1\n";
    return kExitUsage;
  }
  const auto names = verify_suites();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    std::cerr << "unknown suite '" << suite << "'\n";
    return kExitUsage;
  }
  std::vector<VerifyRow> rows;
  for (const auto& s : names)
    if (suite == "all" || suite == s) {
      auto r = run_verify_suite(s, trials, seed, tol);
      rows.insert(rows.end(), r.begin(), r.end());
    }
  if (out.empty()) {
    write_verify_csv(std::cout, rows);
  } else {
    std::ofstream os(out);
    write_verify_csv(os, rows);
  }
  for (const auto& r : rows)
    if (!r.pass) {
      std::cerr << "violation: " << r.suite << '/' << r.check << " trial " << r.trial << " margin " << fmt12(r.margin)
                << " tolerance " << fmt12(r.tolerance) << (r.detail.empty() ? "" : " (" + r.detail + ")") << '\n';
      return kExitVerification;
    }
  return kExitOk;
}

int cmd_pn(const CommonFlags& flags, std::optional<Index> n_flag) {
  const ExperimentConfig c = resolve(flags);
  const Index N = n_flag ? *n_flag : c.N.value_or(1);
  const Density rho = make_state(c.state);
  const FreeFamily f = make_family(c.family, rho, N, c.solver.restarts);
  const Density eta = tensor_power(Density::assume_valid(Operator::from_hermitian(SystemShape{rho.dim()}, rho.matrix())), N);
  SolverSettings s = c.solver;
  s.symmetrize = N > 1;
  const PrimalResult p = hypothesis_primal_solve(eta, c.K, f, s);
  const DualResult d = hypothesis_dual_solve(eta, c.K, f, s);
  std::cout << "N,K,primal,dual,b\n"
            << N << ',' << fmt12(c.K) << ',' << fmt12(p.value) << ',' << fmt12(d.value) << ',' << fmt12(d.b) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steincli: hypothesis-testing exponents, certificate suites and proof-chain runs"};
  app.require_subcommand(1);

  CommonFlags ef;
  bool gnuplot = false;
  auto* exp = app.add_subcommand("exponent", "e_N(y) over the config grid, CSV N,y,e,gap");
  add_common(exp, ef, true);
  exp->add_flag("--gnuplot", gnuplot, "write <out>.gp next to the CSV");

  std::string suite = "all";
  int trials = 500;
  std::uint64_t vseed = 7;
  std::optional<double> vtol;
  std::string vout;
  int vthreads = 1;
  auto* ver = app.add_subcommand("verify", "randomized inequality suites");
  ver->add_option("--suite", suite, "opalg | entropy | optim | symmetry | all");
  ver->add_option("--trials", trials, "trials per check");
  ver->add_option("--seed", vseed, "random seed");
  ver->add_option("--tol", vtol, "override every check tolerance");
  ver->add_option("--out", vout, "CSV path (default stdout)");
  ver->add_option("--threads", vthreads, "accepted for uniformity; suites run sequentially");

  CommonFlags pf;
  bool expect_premise_fail = false;
  std::optional<double> py;
  std::optional<Index> pN;
  auto* pip = app.add_subcommand("pipeline", "run the certified proof chain at one (y, N)");
  add_common(pip, pf, true);
  pip->add_flag("--expect-premise-fail", expect_premise_fail, "exit 0 when the premise check fails");
  pip->add_option("--y", py, "rate (overrides config)");
  pip->add_option("--n", pN, "copies (overrides config)");

  CommonFlags nf;
  std::optional<Index> nN;
  auto* pn = app.add_subcommand("pn", "primal and dual of the hypothesis-testing program");
  add_common(pn, nf, true);
  pn->add_option("--n", nN, "copies (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*exp) return cmd_exponent(ef, gnuplot);
    if (*ver) return cmd_verify(suite, trials, vseed, vtol, vout);
    if (*pn) return cmd_pn(nf, nN);
    if (*pip) {
      const ExperimentConfig c = resolve(pf);
      const auto y = py ? py : c.y;
      const auto N = pN ? pN : c.N;
      if (!y || !N) {
        std::cerr << "pipeline needs y and N\n";
        return kExitUsage;
      }
      PipelineOptions opt;
      opt.expect_premise_fail = expect_premise_fail;
      opt.out_dir = c.out;
      return run_pipeline(c, *y, *N, opt, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::DomainViolation) return kExitUsage;
    return exit_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitVerification;
  }
  return kExitUsage;
}

}  // namespace stein::cli
