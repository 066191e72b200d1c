#pragma once

#include <cmath>
#include <limits>

#include "stein/certificate.hpp"
#include "stein/opalg.hpp"

namespace stein {

template <typename Real>
struct RelEntResult {
  Real value = 0;  // +inf when the support condition fails
  bool support_violation = false;
  Real support_leak = 0;
  bool finite() const { return !support_violation; }
};

struct ContinuityBound {
  double m_tilde = 0;
  double epsilon = 0;
  double bound_value = 0;
};

inline constexpr double kLeakTolerance = 1e-9;

template <typename Real>
Real xlog2x(Real x) { return x > Real(0) ? x * std::log2(x) : Real(0); }

inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::DomainViolation, "binary entropy needs p in [0,1]");
  return -xlog2x(p) - xlog2x(1.0 - p);
}

template <typename Real>
Real von_neumann_entropy(const DensityMatrix<Real>& rho) {
  const RVector<Real> ev = eigenvalues(rho.op());
  Real h = 0;
  for (Index k = 0; k < ev.size(); ++k) h -= xlog2x(ev(k));
  return std::max(h, Real(0));
}

template <typename Real>
RelEntResult<Real> relative_entropy(const DensityMatrix<Real>& rho, const DensityMatrix<Real>& sigma,
                                    double leak_tol = kLeakTolerance, double support_rel = default_tolerances.support) {
  if (rho.shape() != sigma.shape()) fail(ErrorKind::DimensionMismatch, "relative entropy shapes differ");
  const auto s = eigh(sigma.op());
  const Real cut = support_cutoff<Real>(s.values, support_rel);
  const CMatrix<Real> r = s.vectors.adjoint() * rho.matrix() * s.vectors;  // rho in sigma's eigenbasis
  RelEntResult<Real> out;
  Real cross = 0;
  for (Index k = 0; k < s.values.size(); ++k) {
    const Real w = r(k, k).real();
    if (s.values(k) > cut)
      cross += w * std::log2(s.values(k));
    else
      out.support_leak += w;
  }
  if (out.support_leak > Real(leak_tol)) {
    out.support_violation = true;
    out.value = std::numeric_limits<Real>::infinity();
    return out;
  }
  const RVector<Real> er = eigenvalues(rho.op());
  Real neg_h = 0;
  for (Index k = 0; k < er.size(); ++k) neg_h += xlog2x(er(k));
  out.value = neg_h - cross;
  return out;
}

inline double entropy_continuity_bound(Index d, double eps) {
  if (!(eps >= 0.0 && eps <= 0.5)) fail(ErrorKind::DomainViolation, "continuity bound needs eps in [0,1/2]");
  if (d < 1) fail(ErrorKind::DomainViolation, "dimension must be >= 1");
  return 2.0 * eps * std::log2(static_cast<double>(d)) + binary_entropy(2.0 * eps);
}

inline ContinuityBound relent_continuity_bound(double m_tilde, double eps) {
  if (!(m_tilde > 0.0 && m_tilde < 1.0)) fail(ErrorKind::DomainViolation, "m_tilde must lie in (0,1)");
  if (!(eps >= 0.0)) fail(ErrorKind::DomainViolation, "eps must be >= 0");
  const double l = std::log2(1.0 / m_tilde);
  return {m_tilde, eps, 3.0 * l * l / (1.0 - m_tilde) * std::sqrt(eps / 2.0)};
}

template <typename Real>
Real relent_upper_bound(const DensityMatrix<Real>& sigma, double support_rel = default_tolerances.support) {
  const RVector<Real> ev = eigenvalues(sigma.op());
  const Real lmin = ev.minCoeff();
  if (lmin <= support_cutoff<Real>(ev, support_rel)) fail(ErrorKind::SingularSigma, "sigma is not full rank");
  return std::log2(Real(1) / lmin);
}

// rho <= alpha sigma  =>  D(rho||sigma) <= log2 alpha
template <typename Real>
Certificate dominance_to_relent_bound(const DensityMatrix<Real>& rho, const DensityMatrix<Real>& sigma, Real alpha,
                                      double tol = 1e-9) {
  if (!(alpha > Real(0))) fail(ErrorKind::DomainViolation, "alpha must be > 0");
  const Real premise = lambda_min(sigma.op() * alpha - rho.op());
  if (premise < -Real(tol)) fail(ErrorKind::PremiseFailed, "rho <= alpha sigma fails, lambda_min = " + std::to_string(double(premise)));
  const auto d = relative_entropy(rho, sigma);
  const double margin = d.finite() ? double(std::log2(alpha) - d.value) : -std::numeric_limits<double>::infinity();
  return make_certificate("dominance_relent", margin, tol);
}

}  // namespace stein
