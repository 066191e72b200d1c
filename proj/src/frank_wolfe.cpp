#include "stein/frank_wolfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stein/entropy.hpp"
#include "stein/symmetry.hpp"

namespace stein {

void validate(const SolverSettings& s) {
  if (s.max_iters < 1) fail(ErrorKind::DomainViolation, "max_iters must be >= 1");
  if (!(s.tol > 0.0)) fail(ErrorKind::DomainViolation, "tol must be > 0");
  if (s.restarts < 1) fail(ErrorKind::DomainViolation, "restarts must be >= 1");
}

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double huber_plus(double x, double tau) {
  if (x <= 0) return 0;
  if (x <= tau) return x * x / (2 * tau);
  return x - tau / 2;
}
double huber_abs(double x, double tau) { return huber_plus(std::abs(x), tau); }

// v_k^dagger M v_k for the columns k with nonzero weight, weighted and summed
double weighted_quadratic(const Matrix& V, const RealVector& w, const Matrix& M) {
  std::vector<Index> cols;
  for (Index k = 0; k < w.size(); ++k)
    if (w(k) != 0.0) cols.push_back(k);
  if (cols.empty()) return 0.0;
  Matrix W(V.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) W.col(static_cast<Index>(j)) = V.col(cols[j]);
  const Matrix MW = M * W;
  double g = 0;
  for (std::size_t j = 0; j < cols.size(); ++j)
    g += w(cols[j]) * W.col(static_cast<Index>(j)).dot(MW.col(static_cast<Index>(j))).real();
  return g;
}

// sum_k w_k v_k v_k^dagger over the columns with nonzero weight
Matrix weighted_outer(const Matrix& V, const RealVector& w) {
  std::vector<Index> cols;
  for (Index k = 0; k < w.size(); ++k)
    if (w(k) != 0.0) cols.push_back(k);
  Matrix W(V.rows(), static_cast<Index>(cols.size()));
  Matrix Ws(V.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    W.col(static_cast<Index>(j)) = V.col(cols[j]);
    Ws.col(static_cast<Index>(j)) = V.col(cols[j]) * w(cols[j]);
  }
  return Ws * W.adjoint();
}

}  // namespace

// ---- positive part --------------------------------------------------------------

Evaluation PositivePartObjective::evaluate(const Operator& s) const {
  const auto sp = eigh(rho_ - s * b_);
  Evaluation e;
  RealVector d(sp.values.size());
  for (Index k = 0; k < sp.values.size(); ++k) {
    const double l = sp.values(k);
    e.value += huber_plus(l, tau_);
    e.exact += std::max(l, 0.0);
    d(k) = std::clamp(l / tau_, 0.0, 1.0);
  }
  // Tr[(rho - b sigma)_+] >= Tr[E rho] - b Tr[E sigma] for 0 <= E <= I
  e.offset = weighted_quadratic(sp.vectors, d, rho_.matrix());
  e.gradient = Operator(s.shape(), weighted_outer(sp.vectors, RealVector(-b_ * d)));
  return e;
}

double PositivePartObjective::value(const Operator& s) const {
  const RealVector ev = eigenvalues(Operator(rho_ - s * b_));
  double v = 0;
  for (Index k = 0; k < ev.size(); ++k) v += huber_plus(ev(k), tau_);
  return v;
}

double PositivePartObjective::exact(const Operator& s) const { return positive_part_trace(Operator(rho_ - s * b_)); }

Operator PositivePartObjective::gradient(const Operator& s) const { return evaluate(s).gradient; }

std::pair<double, Operator> PositivePartObjective::value_and_gradient(const Operator& s) const {
  auto e = evaluate(s);
  return {e.value, std::move(e.gradient)};
}

double PositivePartObjective::directional(const Operator& s, const Operator& dir) const {
  const auto sp = eigh(rho_ - s * b_);
  const RealVector w = sp.values.unaryExpr([this](double l) { return -b_ * std::clamp(l / tau_, 0.0, 1.0); });
  return weighted_quadratic(sp.vectors, w, dir.matrix());
}

// ---- trace distance -------------------------------------------------------------

Evaluation TraceDistanceObjective::evaluate(const Operator& s) const {
  const auto sp = eigh(s - t_);
  Evaluation e;
  RealVector d(sp.values.size());
  for (Index k = 0; k < sp.values.size(); ++k) {
    const double l = sp.values(k);
    e.value += huber_abs(l, tau_);
    e.exact += std::abs(l);
    d(k) = std::clamp(l / tau_, -1.0, 1.0);
  }
  e.gradient = Operator(s.shape(), weighted_outer(sp.vectors, d));
  e.offset = -inner(e.gradient, t_);
  return e;
}

double TraceDistanceObjective::value(const Operator& s) const {
  const RealVector ev = eigenvalues(Operator(s - t_));
  double v = 0;
  for (Index k = 0; k < ev.size(); ++k) v += huber_abs(ev(k), tau_);
  return v;
}

double TraceDistanceObjective::exact(const Operator& s) const { return trace_norm(Operator(s - t_)); }

Operator TraceDistanceObjective::gradient(const Operator& s) const { return evaluate(s).gradient; }

std::pair<double, Operator> TraceDistanceObjective::value_and_gradient(const Operator& s) const {
  auto e = evaluate(s);
  return {e.value, std::move(e.gradient)};
}

double TraceDistanceObjective::directional(const Operator& s, const Operator& dir) const {
  const auto sp = eigh(s - t_);
  const RealVector w = sp.values.unaryExpr([this](double l) { return std::clamp(l / tau_, -1.0, 1.0); });
  return weighted_quadratic(sp.vectors, w, dir.matrix());
}

// ---- relative entropy -----------------------------------------------------------

RelativeEntropyObjective::RelativeEntropyObjective(Density rho, Density witness, double kappa)
    : rho_(std::move(rho)), w_(witness.op()), kappa_(kappa) {
  if (rho_.shape() != w_.shape()) fail(ErrorKind::DimensionMismatch, "rho and witness shapes differ");
  if (!(kappa_ > 0.0 && kappa_ < 1.0)) fail(ErrorKind::DomainViolation, "kappa must lie in (0,1)");
  const RealVector ev = eigenvalues(rho_.op());
  neg_entropy_ = 0;
  for (Index k = 0; k < ev.size(); ++k) neg_entropy_ += xlog2x(ev(k));
}

Operator RelativeEntropyObjective::mixed(const Operator& s) const { return s * (1.0 - kappa_) + w_ * kappa_; }

Evaluation RelativeEntropyObjective::evaluate(const Operator& s) const {
  const auto sp = eigh(mixed(s));
  const Matrix r = sp.vectors.adjoint() * rho_.matrix() * sp.vectors;
  const Index D = sp.values.size();
  RealVector lam = sp.values.cwiseMax(1e-300);
  double cross = 0;
  for (Index k = 0; k < D; ++k) cross += r(k, k).real() * std::log2(lam(k));
  Evaluation e;
  e.value = neg_entropy_ - cross;
  e.exact = e.value;
  Matrix l(D, D);
  for (Index j = 0; j < D; ++j)
    for (Index i = 0; i < D; ++i) {
      const double a = lam(i), b = lam(j);
      l(i, j) = std::abs(a - b) > 1e-12 * std::max(a, b) ? (std::log(a) - std::log(b)) / (a - b) : 2.0 / (a + b);
    }
  const Matrix g = sp.vectors * r.cwiseProduct(l) * sp.vectors.adjoint();
  e.gradient = Operator(s.shape(), g * (-(1.0 - kappa_) / kLn2));
  return e;
}

double RelativeEntropyObjective::value(const Operator& s) const {
  const auto sp = eigh(mixed(s));
  const Matrix r = sp.vectors.adjoint() * rho_.matrix() * sp.vectors;
  double cross = 0;
  for (Index k = 0; k < sp.values.size(); ++k) cross += r(k, k).real() * std::log2(std::max(sp.values(k), 1e-300));
  return neg_entropy_ - cross;
}

Operator RelativeEntropyObjective::gradient(const Operator& s) const { return evaluate(s).gradient; }

std::pair<double, Operator> RelativeEntropyObjective::value_and_gradient(const Operator& s) const {
  auto e = evaluate(s);
  return {e.value, std::move(e.gradient)};
}

Operator log_frechet_gradient(const Operator& x, const Operator& rho) {
  if (x.shape() != rho.shape()) fail(ErrorKind::DimensionMismatch, "log_frechet_gradient shapes differ");
  const auto sp = eigh(x);
  if (sp.values.minCoeff() <= 0) fail(ErrorKind::SingularSigma, "X must be positive definite");
  const Index D = sp.values.size();
  const Matrix r = sp.vectors.adjoint() * rho.matrix() * sp.vectors;
  Matrix l(D, D);
  for (Index j = 0; j < D; ++j)
    for (Index i = 0; i < D; ++i) {
      const double a = sp.values(i), b = sp.values(j);
      l(i, j) = std::abs(a - b) > 1e-12 * std::max(a, b) ? (std::log(a) - std::log(b)) / (a - b) : 2.0 / (a + b);
    }
  return Operator(x.shape(), sp.vectors * r.cwiseProduct(l) * sp.vectors.adjoint());
}

// ---- Frank-Wolfe ----------------------------------------------------------------

Operator ActiveSet::point() const {
  if (atoms.empty()) fail(ErrorKind::DomainViolation, "empty active set");
  Operator p = atoms.front() * weights.front();
  for (std::size_t k = 1; k < atoms.size(); ++k) p += atoms[k] * weights[k];
  return p;
}

namespace {

Operator oracle(const FreeFamily& f, const Operator& g, const SolverSettings& s, std::uint64_t salt) {
  Density a = linear_min_oracle(f, g, s.seed * 1000003ULL + salt);
  if (s.symmetrize && f.copies() > 1) return twirl(a.op());
  return a.op();
}

std::size_t atom_cap(Index D) {
  const double bytes = 16.0 * static_cast<double>(D) * static_cast<double>(D);
  return static_cast<std::size_t>(std::clamp(4e8 / bytes, 4.0, 100.0));
}

// Fold the lightest atoms into one merged atom; the point is unchanged.
void compact(ActiveSet& a, std::size_t cap) {
  if (a.atoms.size() <= cap) return;
  std::vector<std::size_t> order(a.atoms.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a.weights[x] > a.weights[y]; });
  const std::size_t keep = cap / 2;
  ActiveSet out;
  double wm = 0;
  Operator merged = Operator::zero(a.atoms.front().shape());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t k = order[r];
    if (r < keep) {
      out.atoms.push_back(std::move(a.atoms[k]));
      out.weights.push_back(a.weights[k]);
    } else {
      merged += a.atoms[k] * a.weights[k];
      wm += a.weights[k];
    }
  }
  if (wm > 0) {
    out.atoms.push_back(merged / wm);
    out.weights.push_back(wm);
  }
  a = std::move(out);
}

// root of phi'(t) on [0, tmax] with phi'(0) = d0 < 0 < d1 = phi'(tmax); Illinois variant
double line_search(const Objective& obj, const Operator& x, const Operator& d, double d0, double tmax) {
  const double d1 = obj.directional(x + d * tmax, d);
  if (d1 <= 0) return tmax;
  double a = 0, fa = d0, b = tmax, fb = d1;
  int side = 0;
  for (int it = 0; it < 40; ++it) {
    const double t = (a * fb - b * fa) / (fb - fa);
    const double ft = obj.directional(x + d * t, d);
    if (std::abs(ft) <= 1e-6 * std::abs(d0) || (b - a) <= 1e-12 * tmax) return t;
    if (ft < 0) {
      a = t;
      fa = ft;
      if (side == -1) fb /= 2;
      side = -1;
    } else {
      b = t;
      fb = ft;
      if (side == 1) fa /= 2;
      side = 1;
    }
  }
  return (a * fb - b * fa) / (fb - fa);
}

bool decided(const FrankWolfeState& st, const SolverSettings& s) {
  return st.lower > s.stop_if_lower_above || st.upper < s.stop_if_upper_below;
}

}  // namespace

void frank_wolfe_run(const Objective& obj, const FreeFamily& f, const SolverSettings& s, FrankWolfeState& state,
                     double inner_tol, int iter_budget) {
  validate(s);
  if (state.active.atoms.empty()) {
    Operator a0 = some_member(f).op();
    if (s.symmetrize && f.copies() > 1) a0 = twirl(a0);
    state.active.atoms = {a0};
    state.active.weights = {1.0};
    state.upper = std::numeric_limits<double>::infinity();
    state.lower = -std::numeric_limits<double>::infinity();
    state.best = a0;
  }
  const std::size_t cap = atom_cap(f.total_dim());
  Operator x = state.active.point();
  for (int it = 0; it < iter_budget; ++it) {
    Evaluation ev = obj.evaluate(x);
    if (ev.exact < state.upper) {
      state.upper = ev.exact;
      state.best = x;
    }
    const Operator& g = ev.gradient;
    Operator atom = oracle(f, g, s, static_cast<std::uint64_t>(state.iterations));
    const double gx = inner(g, x);
    const double gap = gx - inner(g, atom);
    state.lower = std::max({state.lower, ev.value - gap, ev.offset + inner(g, atom)});
    ++state.iterations;
    if (state.upper - state.lower <= s.tol || gap <= inner_tol || decided(state, s)) break;

    auto& A = state.active;
    std::size_t away = 0;
    double gaway = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < A.atoms.size(); ++k) {
      const double v = inner(g, A.atoms[k]);
      if (v > gaway) {
        gaway = v;
        away = k;
      }
    }
    std::size_t target = A.atoms.size();
    for (std::size_t k = 0; k < A.atoms.size(); ++k)
      if ((A.atoms[k].matrix() - atom.matrix()).cwiseAbs().maxCoeff() <= 1e-12) {
        target = k;
        break;
      }
    if (target == away) break;  // no descent direction left
    const Operator d = atom - A.atoms[away];
    const double slope = inner(g, atom) - gaway;
    if (!(slope < 0)) break;
    const double gamma = line_search(obj, x, d, slope, A.weights[away]);
    if (target == A.atoms.size()) {
      A.atoms.push_back(std::move(atom));
      A.weights.push_back(gamma);
    } else {
      A.weights[target] += gamma;
    }
    A.weights[away] -= gamma;
    if (A.weights[away] <= 1e-15) {
      A.atoms.erase(A.atoms.begin() + static_cast<std::ptrdiff_t>(away));
      A.weights.erase(A.weights.begin() + static_cast<std::ptrdiff_t>(away));
    }
    compact(A, cap);
    x = (state.iterations % 50 == 0) ? A.point() : Operator(x + d * gamma);
  }
}

OptResult frank_wolfe(const Objective& obj, const FreeFamily& f, const SolverSettings& s,
                      const std::optional<Density>& start) {
  validate(s);
  FrankWolfeState st;
  if (start) {
    Operator a0 = start->op();
    if (a0.shape() != f.shape()) fail(ErrorKind::DimensionMismatch, "start point shape differs from the family");
    if (s.symmetrize && f.copies() > 1) a0 = twirl(a0);
    st.active.atoms = {a0};
    st.active.weights = {1.0};
    st.upper = std::numeric_limits<double>::infinity();
    st.lower = -std::numeric_limits<double>::infinity();
    st.best = a0;
  }
  frank_wolfe_run(obj, f, s, st, 0.0, s.max_iters);
  OptResult r;
  r.value = st.upper;
  r.minimizer = Density::assume_valid(st.best);
  r.fw_gap = std::max(0.0, st.upper - st.lower);
  r.iterations = st.iterations;
  r.converged = r.fw_gap <= s.tol;
  return r;
}

OptResult minimize_smoothed(const SmoothedFactory& make, const FreeFamily& f, const SolverSettings& s,
                            const std::optional<Density>& start) {
  validate(s);
  FrankWolfeState st;
  if (start) {
    Operator a0 = start->op();
    if (a0.shape() != f.shape()) fail(ErrorKind::DimensionMismatch, "start point shape differs from the family");
    if (s.symmetrize && f.copies() > 1) a0 = twirl(a0);
    st.active.atoms = {a0};
    st.active.weights = {1.0};
    st.upper = std::numeric_limits<double>::infinity();
    st.lower = -std::numeric_limits<double>::infinity();
    st.best = a0;
  }
  double tau = 1e-2;
  while (st.iterations < s.max_iters) {
    const bool last = tau <= 1e-14;
    const auto obj = make(tau);
    const int before = st.iterations;
    frank_wolfe_run(*obj, f, s, st, last ? 0.0 : std::max(tau, s.tol / 4), s.max_iters - st.iterations);
    if (st.upper - st.lower <= s.tol || last || decided(st, s)) break;
    if (st.iterations == before) break;
    tau = std::max(tau / 10, 1e-14);
  }
  OptResult r;
  r.value = st.upper;
  r.minimizer = Density::assume_valid(st.best);
  r.fw_gap = std::max(0.0, st.upper - st.lower);
  r.iterations = st.iterations;
  r.converged = r.fw_gap <= s.tol;
  return r;
}

}  // namespace stein
