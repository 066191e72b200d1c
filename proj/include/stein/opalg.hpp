#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stein/errors.hpp"

namespace stein {

using Index = Eigen::Index;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct Tolerances {
  double psd = 1e-10;        // eigenvalues in (-psd, 0) are clamped
  double trace = 1e-10;      // |Tr rho - 1|
  double support = 1e-12;    // relative to lambda_max
  double hermitian = 1e-12;
  double norm = 1e-12;       // pure-state normalisation
};

inline constexpr Tolerances default_tolerances{};

// Subsystem dimensions; the first subsystem is the most significant Kronecker factor.
class SystemShape {
 public:
  SystemShape() = default;
  explicit SystemShape(std::vector<Index> dims) : dims_(std::move(dims)) {
    for (Index d : dims_)
      if (d < 1) fail(ErrorKind::DimensionMismatch, "subsystem dimension must be >= 1");
    total_ = std::accumulate(dims_.begin(), dims_.end(), Index{1}, std::multiplies<>());
  }
  SystemShape(std::initializer_list<Index> dims) : SystemShape(std::vector<Index>(dims)) {}

  static SystemShape uniform(Index d, Index copies) {
    return SystemShape(std::vector<Index>(static_cast<std::size_t>(copies), d));
  }

  const std::vector<Index>& dims() const { return dims_; }
  Index dim(Index k) const { return dims_.at(static_cast<std::size_t>(k)); }
  Index subsystems() const { return static_cast<Index>(dims_.size()); }
  Index total_dim() const { return total_; }

  SystemShape concat(const SystemShape& other) const {
    std::vector<Index> d = dims_;
    d.insert(d.end(), other.dims_.begin(), other.dims_.end());
    return SystemShape(std::move(d));
  }

  SystemShape without(const std::vector<Index>& removed) const {
    std::vector<Index> d;
    for (Index k = 0; k < subsystems(); ++k)
      if (std::find(removed.begin(), removed.end(), k) == removed.end()) d.push_back(dim(k));
    return SystemShape(std::move(d));
  }

  bool operator==(const SystemShape& o) const { return dims_ == o.dims_; }
  bool operator!=(const SystemShape& o) const { return !(*this == o); }

  std::string str() const {
    std::string s;
    for (std::size_t k = 0; k < dims_.size(); ++k) s += (k ? "," : "") + std::to_string(dims_[k]);
    return s;
  }

 private:
  std::vector<Index> dims_;
  Index total_ = 1;
};

namespace detail {

inline void check_subsystem_list(const SystemShape& shape, const std::vector<Index>& subs) {
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i] < 0 || subs[i] >= shape.subsystems())
      fail(ErrorKind::IndexOutOfRange, "subsystem " + std::to_string(subs[i]) + " not in shape [" + shape.str() + "]");
    for (std::size_t j = 0; j < i; ++j)
      if (subs[i] == subs[j]) fail(ErrorKind::IndexOutOfRange, "repeated subsystem index");
  }
}

// map[J] = flat input index of flat output index J, where output factor k is input factor perm[k].
inline std::vector<Index> permutation_map(const std::vector<Index>& dims, const std::vector<Index>& perm) {
  const std::size_t n = dims.size();
  std::vector<Index> in_stride(n, 1);
  for (std::size_t k = n; k-- > 1;) in_stride[k - 1] = in_stride[k] * dims[k];
  Index total = 1;
  for (Index d : dims) total *= d;
  std::vector<Index> out_dims(n), out_stride(n);
  for (std::size_t k = 0; k < n; ++k) out_dims[k] = dims[static_cast<std::size_t>(perm[k])];
  std::vector<Index> map(static_cast<std::size_t>(total));
  std::vector<Index> digit(n, 0);
  for (Index J = 0; J < total; ++J) {
    Index I = 0;
    for (std::size_t k = 0; k < n; ++k) I += digit[k] * in_stride[static_cast<std::size_t>(perm[k])];
    map[static_cast<std::size_t>(J)] = I;
    for (std::size_t k = n; k-- > 0;) {
      if (++digit[k] < out_dims[k]) break;
      digit[k] = 0;
    }
  }
  return map;
}

inline void check_permutation(const std::vector<Index>& perm, Index n) {
  if (static_cast<Index>(perm.size()) != n) fail(ErrorKind::DimensionMismatch, "permutation length differs from subsystem count");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Index p : perm) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) fail(ErrorKind::DimensionMismatch, "not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
}

template <typename Real>
CMatrix<Real> permute_matrix(const CMatrix<Real>& m, const std::vector<Index>& dims, const std::vector<Index>& perm) {
  const auto map = permutation_map(dims, perm);
  const Index D = m.rows();
  CMatrix<Real> out(D, D);
  for (Index j = 0; j < D; ++j)
    for (Index i = 0; i < D; ++i) out(i, j) = m(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]);
  return out;
}

template <typename Real>
CVector<Real> permute_vector(const CVector<Real>& v, const std::vector<Index>& dims, const std::vector<Index>& perm) {
  const auto map = permutation_map(dims, perm);
  CVector<Real> out(v.size());
  for (Index i = 0; i < v.size(); ++i) out(i) = v(map[static_cast<std::size_t>(i)]);
  return out;
}

// kept subsystems (ascending) followed by traced ones
inline std::vector<Index> kept_then_traced(Index n, const std::vector<Index>& traced) {
  std::vector<Index> perm;
  for (Index k = 0; k < n; ++k)
    if (std::find(traced.begin(), traced.end(), k) == traced.end()) perm.push_back(k);
  std::vector<Index> t = traced;
  std::sort(t.begin(), t.end());
  perm.insert(perm.end(), t.begin(), t.end());
  return perm;
}

}  // namespace detail

template <typename Real>
class HermitianOperator {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = CMatrix<Real>;

  HermitianOperator() = default;

  HermitianOperator(SystemShape shape, const Matrix& m) : shape_(std::move(shape)) {
    if (m.rows() != shape_.total_dim() || m.cols() != shape_.total_dim())
      fail(ErrorKind::DimensionMismatch, "matrix size does not match shape [" + shape_.str() + "]");
    m_ = (m + m.adjoint()) / Real(2);
  }

  explicit HermitianOperator(const Matrix& m) : HermitianOperator(SystemShape({m.rows()}), m) {}

  // Caller guarantees m is exactly Hermitian.
  static HermitianOperator from_hermitian(SystemShape shape, Matrix m) {
    HermitianOperator h;
    h.shape_ = std::move(shape);
    h.m_ = std::move(m);
    return h;
  }

  static HermitianOperator identity(const SystemShape& shape) {
    return from_hermitian(shape, Matrix::Identity(shape.total_dim(), shape.total_dim()));
  }
  static HermitianOperator zero(const SystemShape& shape) {
    return from_hermitian(shape, Matrix::Zero(shape.total_dim(), shape.total_dim()));
  }
  static HermitianOperator diagonal(const SystemShape& shape, const RVector<Real>& d) {
    if (d.size() != shape.total_dim()) fail(ErrorKind::DimensionMismatch, "diagonal length");
    return from_hermitian(shape, d.template cast<Scalar>().asDiagonal());
  }
  static HermitianOperator outer(const SystemShape& shape, const CVector<Real>& v) {
    if (v.size() != shape.total_dim()) fail(ErrorKind::DimensionMismatch, "vector length");
    return HermitianOperator(shape, v * v.adjoint());
  }

  const SystemShape& shape() const { return shape_; }
  const Matrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  Real trace() const { return m_.diagonal().real().sum(); }

  HermitianOperator& operator+=(const HermitianOperator& o) { check(o); m_ += o.m_; return *this; }
  HermitianOperator& operator-=(const HermitianOperator& o) { check(o); m_ -= o.m_; return *this; }
  HermitianOperator& operator*=(Real s) { m_ *= s; return *this; }
  HermitianOperator& operator/=(Real s) { m_ /= s; return *this; }

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(HermitianOperator a, Real s) { return a *= s; }
  friend HermitianOperator operator*(Real s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator/(HermitianOperator a, Real s) { return a /= s; }
  friend HermitianOperator operator-(HermitianOperator a) { a.m_ = -a.m_; return a; }

 private:
  void check(const HermitianOperator& o) const {
    if (o.shape_ != shape_) fail(ErrorKind::DimensionMismatch, "shapes [" + shape_.str() + "] and [" + o.shape_.str() + "]");
  }

  SystemShape shape_;
  Matrix m_;
};

template <typename Real>
struct Spectrum {
  RVector<Real> values;  // ascending
  CMatrix<Real> vectors;
};

template <typename Real>
Spectrum<Real> eigh(const CMatrix<Real>& m) {
  const Index n = m.rows();
  Spectrum<Real> s;
  const bool diagonal = (m.array() != std::complex<Real>(0)).count() == (m.diagonal().array() != std::complex<Real>(0)).count();
  if (diagonal) {
    RVector<Real> d = m.diagonal().real();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d(a) < d(b); });
    s.values.resize(n);
    s.vectors = CMatrix<Real>::Zero(n, n);
    for (Index k = 0; k < n; ++k) {
      s.values(k) = d(order[static_cast<std::size_t>(k)]);
      s.vectors(order[static_cast<std::size_t>(k)], k) = Real(1);
    }
    return s;
  }
  if (m.imag().isZero(0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> es(m.real());
    s.values = es.eigenvalues();
    s.vectors = es.eigenvectors().template cast<std::complex<Real>>();
    return s;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(m);
  s.values = es.eigenvalues();
  s.vectors = es.eigenvectors();
  return s;
}

template <typename Real>
Spectrum<Real> eigh(const HermitianOperator<Real>& a) { return eigh<Real>(a.matrix()); }

template <typename Real>
RVector<Real> eigenvalues(const HermitianOperator<Real>& a) {
  const auto& m = a.matrix();
  if (m.imag().isZero(0)) {
    RVector<Real> v = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>>(m.real(), Eigen::EigenvaluesOnly).eigenvalues();
    return v;
  }
  return Eigen::SelfAdjointEigenSolver<CMatrix<Real>>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

template <typename Real>
Real lambda_min(const HermitianOperator<Real>& a) { return eigenvalues(a).minCoeff(); }
template <typename Real>
Real lambda_max(const HermitianOperator<Real>& a) { return eigenvalues(a).maxCoeff(); }

template <typename Real>
CMatrix<Real> reconstruct(const Spectrum<Real>& s, const RVector<Real>& f) {
  return s.vectors * f.template cast<std::complex<Real>>().asDiagonal() * s.vectors.adjoint();
}

template <typename Real, typename F>
HermitianOperator<Real> spectral_apply(const HermitianOperator<Real>& a, F&& fn) {
  const auto s = eigh(a);
  RVector<Real> f = s.values.unaryExpr(fn);
  return HermitianOperator<Real>(a.shape(), reconstruct(s, f));
}

template <typename Real>
class PureState {
 public:
  PureState() = default;
  PureState(SystemShape shape, CVector<Real> amps, double tol = default_tolerances.norm)
      : shape_(std::move(shape)), v_(std::move(amps)) {
    if (v_.size() != shape_.total_dim()) fail(ErrorKind::DimensionMismatch, "amplitude length does not match shape");
    if (std::abs(v_.norm() - Real(1)) > tol) fail(ErrorKind::InvalidState, "pure state norm differs from 1");
  }

  static PureState normalized(SystemShape shape, const CVector<Real>& v) {
    const Real n = v.norm();
    if (!(n > Real(0))) fail(ErrorKind::ZeroNorm, "cannot normalise a zero vector");
    return PureState(std::move(shape), v / n);
  }
  static PureState basis(SystemShape shape, Index k) {
    CVector<Real> v = CVector<Real>::Zero(shape.total_dim());
    if (k < 0 || k >= v.size()) fail(ErrorKind::IndexOutOfRange, "basis index");
    v(k) = Real(1);
    return PureState(std::move(shape), v);
  }

  const SystemShape& shape() const { return shape_; }
  const CVector<Real>& amplitudes() const { return v_; }
  Index dim() const { return v_.size(); }

 private:
  SystemShape shape_;
  CVector<Real> v_;
};

template <typename Real>
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(HermitianOperator<Real> op, const Tolerances& tol = default_tolerances) : op_(std::move(op)) {
    if (std::abs(op_.trace() - Real(1)) > tol.trace) fail(ErrorKind::InvalidState, "trace differs from 1");
    if (op_.dim() > 0 && lambda_min(op_) < -tol.psd) fail(ErrorKind::NegativeEigenvalue, "density matrix is not PSD");
  }
  DensityMatrix(SystemShape shape, const CMatrix<Real>& m) : DensityMatrix(HermitianOperator<Real>(std::move(shape), m)) {}
  explicit DensityMatrix(const PureState<Real>& p) : op_(HermitianOperator<Real>::outer(p.shape(), p.amplitudes())) {}

  // Caller guarantees validity (products, marginals and mixtures of valid states).
  static DensityMatrix assume_valid(HermitianOperator<Real> op) {
    DensityMatrix d;
    d.op_ = std::move(op);
    return d;
  }
  static DensityMatrix maximally_mixed(const SystemShape& shape) {
    return assume_valid(HermitianOperator<Real>::identity(shape) / Real(shape.total_dim()));
  }
  static DensityMatrix diagonal(const SystemShape& shape, const RVector<Real>& p) {
    return DensityMatrix(HermitianOperator<Real>::diagonal(shape, p));
  }

  const HermitianOperator<Real>& op() const { return op_; }
  operator const HermitianOperator<Real>&() const { return op_; }
  const SystemShape& shape() const { return op_.shape(); }
  const CMatrix<Real>& matrix() const { return op_.matrix(); }
  Index dim() const { return op_.dim(); }

 private:
  HermitianOperator<Real> op_;
};

template <typename Real>
DensityMatrix<Real> mix(const DensityMatrix<Real>& a, const DensityMatrix<Real>& b, Real t) {
  return DensityMatrix<Real>::assume_valid(a.op() * (Real(1) - t) + b.op() * t);
}

// ---- products and marginals -------------------------------------------------

template <typename Real>
HermitianOperator<Real> tensor(const HermitianOperator<Real>& a, const HermitianOperator<Real>& b) {
  const auto& A = a.matrix();
  const auto& B = b.matrix();
  CMatrix<Real> K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return HermitianOperator<Real>::from_hermitian(a.shape().concat(b.shape()), std::move(K));
}

template <typename Real>
DensityMatrix<Real> tensor(const DensityMatrix<Real>& a, const DensityMatrix<Real>& b) {
  return DensityMatrix<Real>::assume_valid(tensor(a.op(), b.op()));
}

template <typename Real>
PureState<Real> tensor(const PureState<Real>& a, const PureState<Real>& b) {
  CVector<Real> v(a.dim() * b.dim());
  for (Index i = 0; i < a.dim(); ++i) v.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  return PureState<Real>(a.shape().concat(b.shape()), v, 1e-9);
}

template <typename T>
T tensor_power(const T& a, Index n) {
  if (n < 1) fail(ErrorKind::DomainViolation, "tensor power needs n >= 1");
  T out = a;
  for (Index k = 1; k < n; ++k) out = tensor(out, a);
  return out;
}

template <typename Real>
HermitianOperator<Real> partial_trace(const HermitianOperator<Real>& a, const std::vector<Index>& traced) {
  const SystemShape& shape = a.shape();
  detail::check_subsystem_list(shape, traced);
  const SystemShape kept = shape.without(traced);
  const Index DK = kept.total_dim();
  const Index DT = shape.total_dim() / DK;
  const auto map = detail::permutation_map(shape.dims(), detail::kept_then_traced(shape.subsystems(), traced));
  const auto& M = a.matrix();
  CMatrix<Real> out = CMatrix<Real>::Zero(DK, DK);
  for (Index j = 0; j < DK; ++j)
    for (Index i = 0; i < DK; ++i) {
      std::complex<Real> acc(0);
      for (Index t = 0; t < DT; ++t)
        acc += M(map[static_cast<std::size_t>(i * DT + t)], map[static_cast<std::size_t>(j * DT + t)]);
      out(i, j) = acc;
    }
  return HermitianOperator<Real>(kept, out);
}

template <typename Real>
DensityMatrix<Real> partial_trace(const DensityMatrix<Real>& a, const std::vector<Index>& traced) {
  return DensityMatrix<Real>::assume_valid(partial_trace(a.op(), traced));
}

// Marginal of |v><v| computed from the reshaped amplitude vector.
template <typename Real>
DensityMatrix<Real> reduced_state(const PureState<Real>& v, const std::vector<Index>& traced) {
  const SystemShape& shape = v.shape();
  detail::check_subsystem_list(shape, traced);
  const SystemShape kept = shape.without(traced);
  const Index DK = kept.total_dim();
  const Index DT = shape.total_dim() / DK;
  const CVector<Real> w = detail::permute_vector<Real>(v.amplitudes(), shape.dims(), detail::kept_then_traced(shape.subsystems(), traced));
  const Eigen::Map<const CMatrix<Real>> V(w.data(), DT, DK);  // column k = kept index k
  CMatrix<Real> rho = (V.adjoint() * V).transpose();
  return DensityMatrix<Real>::assume_valid(HermitianOperator<Real>(kept, rho));
}

inline std::vector<Index> first_subsystems(Index count) {
  std::vector<Index> v(static_cast<std::size_t>(count));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

template <typename Real>
HermitianOperator<Real> permute_subsystems(const HermitianOperator<Real>& a, const std::vector<Index>& perm) {
  const auto& dims = a.shape().dims();
  detail::check_permutation(perm, a.shape().subsystems());
  for (std::size_t k = 0; k < perm.size(); ++k)
    if (dims[static_cast<std::size_t>(perm[k])] != dims[k]) fail(ErrorKind::DimensionMismatch, "permuted subsystem dimensions differ");
  return HermitianOperator<Real>::from_hermitian(a.shape(), detail::permute_matrix<Real>(a.matrix(), dims, perm));
}

template <typename Real>
DensityMatrix<Real> permute_subsystems(const DensityMatrix<Real>& a, const std::vector<Index>& perm) {
  return DensityMatrix<Real>::assume_valid(permute_subsystems(a.op(), perm));
}

template <typename Real>
PureState<Real> permute_subsystems(const PureState<Real>& v, const std::vector<Index>& perm) {
  const auto& dims = v.shape().dims();
  detail::check_permutation(perm, v.shape().subsystems());
  for (std::size_t k = 0; k < perm.size(); ++k)
    if (dims[static_cast<std::size_t>(perm[k])] != dims[k]) fail(ErrorKind::DimensionMismatch, "permuted subsystem dimensions differ");
  return PureState<Real>(v.shape(), detail::permute_vector<Real>(v.amplitudes(), dims, perm), 1e-9);
}

// ---- spectral functions -----------------------------------------------------

template <typename Real>
HermitianOperator<Real> positive_part(const HermitianOperator<Real>& a) {
  return spectral_apply(a, [](Real x) { return x > Real(0) ? x : Real(0); });
}

template <typename Real>
Real positive_part_trace(const HermitianOperator<Real>& a) {
  const RVector<Real> ev = eigenvalues(a);
  return ev.cwiseMax(Real(0)).sum();
}

template <typename Real>
Real trace_norm(const HermitianOperator<Real>& a) { return eigenvalues(a).cwiseAbs().sum(); }

template <typename Real>
Real inner(const HermitianOperator<Real>& a, const HermitianOperator<Real>& b) {
  return (a.matrix().conjugate().array() * b.matrix().array()).real().sum();
}

template <typename Real>
HermitianOperator<Real> sqrt_psd(const HermitianOperator<Real>& a, double psd_tol = default_tolerances.psd) {
  const auto s = eigh(a);
  if (s.values.size() && s.values.minCoeff() < -psd_tol) fail(ErrorKind::NegativeEigenvalue, "sqrt of a non-PSD operator");
  // eigenvalues at round-off level are zero; their square roots would not be
  const Real noise = Real(64) * std::numeric_limits<Real>::epsilon() * (s.values.size() ? s.values.cwiseAbs().maxCoeff() : Real(0));
  RVector<Real> f = s.values.unaryExpr([noise](Real x) { return x > noise ? std::sqrt(x) : Real(0); });
  return HermitianOperator<Real>(a.shape(), reconstruct(s, f));
}

template <typename Real>
Real fidelity(const HermitianOperator<Real>& p, const HermitianOperator<Real>& q, double psd_tol = default_tolerances.psd) {
  if (p.shape() != q.shape()) fail(ErrorKind::DimensionMismatch, "fidelity shapes differ");
  const CMatrix<Real> sp = sqrt_psd(p, psd_tol).matrix();
  const CMatrix<Real> sq = sqrt_psd(q, psd_tol).matrix();
  return Eigen::JacobiSVD<CMatrix<Real>>(sp * sq).singularValues().sum();
}

template <typename Real>
Real fidelity(const PureState<Real>& a, const PureState<Real>& b) {
  return std::abs(a.amplitudes().dot(b.amplitudes()));
}

template <typename Real>
Real support_cutoff(const RVector<Real>& ev, double rel = default_tolerances.support) {
  const Real top = ev.size() ? std::max(ev.maxCoeff(), Real(0)) : Real(0);
  return Real(rel) * top;
}

template <typename Real>
HermitianOperator<Real> log2_on_support(const HermitianOperator<Real>& a, double rel = default_tolerances.support) {
  const auto s = eigh(a);
  const Real cut = support_cutoff<Real>(s.values, rel);
  RVector<Real> f = s.values.unaryExpr([cut](Real x) { return x > cut ? std::log2(x) : Real(0); });
  return HermitianOperator<Real>(a.shape(), reconstruct(s, f));
}

template <typename Real>
HermitianOperator<Real> support_projector(const HermitianOperator<Real>& a, double rel = default_tolerances.support) {
  const auto s = eigh(a);
  const Real cut = support_cutoff<Real>(s.values, rel);
  RVector<Real> f = s.values.unaryExpr([cut](Real x) { return x > cut ? Real(1) : Real(0); });
  return HermitianOperator<Real>(a.shape(), reconstruct(s, f));
}

// ---- channels ---------------------------------------------------------------

template <typename Real>
using KrausList = std::vector<CMatrix<Real>>;

template <typename Real>
HermitianOperator<Real> apply_kraus(const HermitianOperator<Real>& a, const KrausList<Real>& kraus,
                                    double tol = 1e-10) {
  if (kraus.empty()) fail(ErrorKind::NotTracePreserving, "empty Kraus list");
  const Index din = a.dim();
  const Index dout = kraus.front().rows();
  CMatrix<Real> completeness = CMatrix<Real>::Zero(din, din);
  for (const auto& K : kraus) {
    if (K.cols() != din || K.rows() != dout) fail(ErrorKind::DimensionMismatch, "Kraus operator size");
    completeness += K.adjoint() * K;
  }
  if ((completeness - CMatrix<Real>::Identity(din, din)).cwiseAbs().maxCoeff() > tol)
    fail(ErrorKind::NotTracePreserving, "sum of K^dagger K differs from identity");
  CMatrix<Real> out = CMatrix<Real>::Zero(dout, dout);
  for (const auto& K : kraus) out += K * a.matrix() * K.adjoint();
  SystemShape shape = dout == din ? a.shape() : SystemShape({dout});
  return HermitianOperator<Real>(shape, out);
}

// ---- double aliases -----------------------------------------------------------

using Operator = HermitianOperator<double>;
using Density = DensityMatrix<double>;
using Pure = PureState<double>;
using Matrix = CMatrix<double>;
using Vector = CVector<double>;
using RealVector = RVector<double>;

}  // namespace stein
