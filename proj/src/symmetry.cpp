#include "stein/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stein/entropy.hpp"
#include "stein/random.hpp"

namespace stein {

namespace {

Index ipow(Index b, Index e) {
  Index r = 1;
  for (Index k = 0; k < e; ++k) r *= b;
  return r;
}

std::vector<Index> swap_map(Index d, Index n, Index a, Index b) {
  std::vector<Index> perm = first_subsystems(n);
  std::swap(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  return detail::permutation_map(std::vector<Index>(static_cast<std::size_t>(n), d), perm);
}

Index uniform_factor(const SystemShape& shape) {
  const auto& dims = shape.dims();
  if (dims.empty()) fail(ErrorKind::DimensionMismatch, "empty shape");
  for (Index x : dims)
    if (x != dims.front()) fail(ErrorKind::DimensionMismatch, "subsystems of shape [" + shape.str() + "] differ");
  return dims.front();
}

Matrix conjugate_by_map(const Matrix& m, const std::vector<Index>& map) {
  const Index D = m.rows();
  Matrix out(D, D);
  for (Index j = 0; j < D; ++j)
    for (Index i = 0; i < D; ++i) out(i, j) = m(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]);
  return out;
}

Vector gather(const Vector& v, const std::vector<Index>& map) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out(i) = v(map[static_cast<std::size_t>(i)]);
  return out;
}

// Contract factor k of v (n factors of dim d) with conj(u).
Vector contract_factor(const Vector& v, const Vector& u, Index d, Index n, Index k) {
  const Index left = ipow(d, k), right = ipow(d, n - k - 1);
  Vector out = Vector::Zero(left * right);
  for (Index l = 0; l < left; ++l)
    for (Index a = 0; a < d; ++a)
      out.segment(l * right, right) += std::conj(u(a)) * v.segment((l * d + a) * right, right);
  return out;
}

}  // namespace

Index sym_dim(Index n, Index d) {
  if (n < 1 || d < 1) fail(ErrorKind::DomainViolation, "sym_dim needs N >= 1 and d >= 1");
  // binomial(n + d - 1, n), exact in integers
  Index r = 1;
  for (Index k = 1; k <= std::min(n, d - 1); ++k) r = r * (n + d - 1 - std::min(n, d - 1) + k) / k;
  return r;
}

Operator sym_projector(Index n, Index d) {
  if (n < 1 || d < 1) fail(ErrorKind::DomainViolation, "sym_projector needs N >= 1 and d >= 1");
  const Index D = ipow(d, n);
  if (D > kDenseDimensionCap) fail(ErrorKind::DimensionCap, "d^N = " + std::to_string(D) + " exceeds the cap");
  std::map<std::vector<Index>, std::vector<Index>> classes;
  for (Index i = 0; i < D; ++i) {
    std::vector<Index> digits(static_cast<std::size_t>(n));
    Index x = i;
    for (Index k = n; k-- > 0;) {
      digits[static_cast<std::size_t>(k)] = x % d;
      x /= d;
    }
    std::sort(digits.begin(), digits.end());
    classes[digits].push_back(i);
  }
  Matrix p = Matrix::Zero(D, D);
  for (const auto& [key, members] : classes) {
    const double w = 1.0 / static_cast<double>(members.size());
    for (Index i : members)
      for (Index j : members) p(i, j) = w;
  }
  return Operator::from_hermitian(SystemShape::uniform(d, n), p);
}

// T_m = (1/m) sum_{k<=m} tau_{k m} T_{m-1} tau_{k m}
Operator twirl(const Operator& a) {
  const Index d = uniform_factor(a.shape());
  const Index n = a.shape().subsystems();
  Matrix t = a.matrix();
  for (Index m = 1; m < n; ++m) {
    Matrix acc = t;
    for (Index k = 0; k < m; ++k) acc += conjugate_by_map(t, swap_map(d, n, k, m));
    t = acc / static_cast<double>(m + 1);
  }
  return Operator(a.shape(), t);
}

Density twirl(const Density& a) { return Density::assume_valid(twirl(a.op())); }

Vector symmetrize_vector(const Vector& v, Index d, Index n) {
  if (v.size() != ipow(d, n)) fail(ErrorKind::DimensionMismatch, "vector length differs from d^n");
  Vector t = v;
  for (Index m = 1; m < n; ++m) {
    Vector acc = t;
    for (Index k = 0; k < m; ++k) acc += gather(t, swap_map(d, n, k, m));
    t = acc / static_cast<double>(m + 1);
  }
  return t;
}

double symmetric_residual(const Pure& v) {
  const Index d = uniform_factor(v.shape());
  const Index n = v.shape().subsystems();
  double r = 0;
  for (Index k = 0; k + 1 < n; ++k)
    r = std::max(r, (gather(v.amplitudes(), swap_map(d, n, k, k + 1)) - v.amplitudes()).norm());
  return r;
}

double permutation_residual(const Operator& a) {
  const Index d = uniform_factor(a.shape());
  const Index n = a.shape().subsystems();
  double r = 0;
  for (Index k = 0; k + 1 < n; ++k)
    r = std::max(r, (conjugate_by_map(a.matrix(), swap_map(d, n, k, k + 1)) - a.matrix()).cwiseAbs().maxCoeff());
  return r;
}

Vector apply_local(const Vector& v, const Matrix& u, Index d, Index n) {
  if (u.rows() != d || u.cols() != d || v.size() != ipow(d, n)) fail(ErrorKind::DimensionMismatch, "apply_local sizes");
  Vector w = v;
  const Matrix ut = u.transpose();
  for (Index k = 0; k < n; ++k) {
    const Index left = ipow(d, k), right = ipow(d, n - k - 1);
    for (Index l = 0; l < left; ++l) {
      Eigen::Map<Matrix> blk(w.data() + l * d * right, right, d);
      blk = (blk * ut).eval();
    }
  }
  return w;
}

Matrix basis_completion(const Vector& base) {
  const Index d = base.size();
  Matrix m(d, d + 1);
  m.col(0) = base.normalized();
  m.rightCols(d) = Matrix::Identity(d, d);
  // Gram-Schmidt keeping base first
  Matrix q(d, d);
  Index filled = 0;
  for (Index c = 0; c < d + 1 && filled < d; ++c) {
    Vector x = m.col(c);
    for (Index j = 0; j < filled; ++j) x -= q.col(j).dot(x) * q.col(j);
    for (Index j = 0; j < filled; ++j) x -= q.col(j).dot(x) * q.col(j);
    if (x.norm() > 1e-8) q.col(filled++) = x.normalized();
  }
  q.col(0) = base.normalized();
  return q;
}

Pure symmetrize_tail(const Pure& base, const Pure& psi_r, Index n, Index r) {
  if (r < 0 || r > n) fail(ErrorKind::DomainViolation, "need 0 <= r <= N-M");
  const Index d = base.dim();
  const SystemShape shape = SystemShape::uniform(d, n);
  if (r == 0) return Pure(shape, tensor_power(Pure(SystemShape({d}), base.amplitudes(), 1e-9), n).amplitudes(), 1e-9);
  if (psi_r.dim() != ipow(d, r)) fail(ErrorKind::DimensionMismatch, "psi_r must live on r factors");
  for (Index k = 0; k < r; ++k)
    if (contract_factor(psi_r.amplitudes(), base.amplitudes(), d, r, k).norm() > 1e-8)
      fail(ErrorKind::NotOrthogonal, "psi_r overlaps base on factor " + std::to_string(k));

  Vector head = Vector::Ones(1);
  for (Index k = 0; k < n - r; ++k) {
    Vector nx(head.size() * d);
    for (Index i = 0; i < head.size(); ++i) nx.segment(i * d, d) = head(i) * base.amplitudes();
    head = nx;
  }
  Vector w(head.size() * psi_r.dim());
  for (Index i = 0; i < head.size(); ++i) w.segment(i * psi_r.dim(), psi_r.dim()) = head(i) * psi_r.amplitudes();

  const std::vector<Index> dims(static_cast<std::size_t>(n), d);
  Vector acc = Vector::Zero(w.size());
  double count = 0;
  for (Index mask = 0; mask < (Index{1} << n); ++mask) {
    if (__builtin_popcountll(static_cast<unsigned long long>(mask)) != r) continue;
    std::vector<Index> perm(static_cast<std::size_t>(n));
    Index nb = 0, np = n - r;
    for (Index k = 0; k < n; ++k) perm[static_cast<std::size_t>(k)] = (mask >> (n - 1 - k)) & 1 ? np++ : nb++;
    acc += detail::permute_vector<double>(w, dims, perm);
    count += 1;
  }
  return Pure(shape, acc / std::sqrt(count), 1e-8);
}

Pure build_almost_power(const AlmostPowerSpec& spec) {
  if (spec.R < 0 || spec.R > spec.n) fail(ErrorKind::DomainViolation, "need R <= N-M");
  if (spec.betas.size() != spec.R + 1) fail(ErrorKind::DimensionMismatch, "betas must have length R+1");
  if (std::abs(spec.betas.squaredNorm() - 1.0) > 1e-10) fail(ErrorKind::InvalidState, "sum |beta_r|^2 differs from 1");
  if (static_cast<Index>(spec.orth_components.size()) < spec.R + 1)
    fail(ErrorKind::DimensionMismatch, "orth_components must have R+1 entries");
  Vector v = spec.betas(0) * symmetrize_tail(spec.base, Pure(), spec.n, 0).amplitudes();
  for (Index r = 1; r <= spec.R; ++r) {
    if (spec.betas(r) == 0.0) continue;
    v += spec.betas(r) * symmetrize_tail(spec.base, spec.orth_components[static_cast<std::size_t>(r)], spec.n, r).amplitudes();
  }
  return Pure(SystemShape::uniform(spec.base.dim(), spec.n), v, 1e-9);
}

std::vector<Vector> defect_components(const Vector& v, const Pure& base, Index n) {
  const Index d = base.dim();
  if (v.size() != ipow(d, n)) fail(ErrorKind::DimensionMismatch, "vector length differs from d^n");
  const Matrix u = basis_completion(base.amplitudes());
  const Vector w = apply_local(v, u.adjoint(), d, n);
  std::vector<Vector> buckets(static_cast<std::size_t>(n + 1), Vector::Zero(v.size()));
  for (Index i = 0; i < w.size(); ++i) {
    Index x = i, r = 0;
    for (Index k = 0; k < n; ++k) {
      r += (x % d) != 0;
      x /= d;
    }
    buckets[static_cast<std::size_t>(r)](i) = w(i);
  }
  for (auto& b : buckets) b = apply_local(b, u, d, n);
  return buckets;
}

Pure standard_purification(const Density& rho) {
  const Matrix s = sqrt_psd(rho.op()).matrix();
  const Index d = rho.dim();
  Vector v(d * d);
  for (Index a = 0; a < d; ++a)
    for (Index e = 0; e < d; ++e) v(a * d + e) = s(a, e);
  return Pure::normalized(SystemShape({d * d}), v);
}

PurificationPair perm_invariant_purification(const Density& rho, const Density& rho_n, std::uint64_t seed) {
  const Index d = rho.dim();
  const Index n = rho_n.shape().subsystems();
  if (rho_n.shape() != SystemShape::uniform(d, n)) fail(ErrorKind::DimensionMismatch, "rho_N must live on copies of rho's space");
  if (ipow(d * d, n) > kPurifiedDimensionCap) fail(ErrorKind::DimensionCap, "(d^2)^N exceeds the purification cap");
  if (permutation_residual(rho_n.op()) > 1e-8) fail(ErrorKind::NotPermutationInvariant, "rho_N is not permutation invariant");

  const Index D = rho_n.dim();
  // twirl the Hermitian and anti-Hermitian parts separately
  auto twirl_general = [&](const Matrix& z) {
    const Matrix h1 = (z + z.adjoint()) / 2.0, h2 = (z - z.adjoint()) / std::complex<double>(0, 2);
    return Matrix(twirl(Operator(rho_n.shape(), h1)).matrix() +
                  std::complex<double>(0, 1) * twirl(Operator(rho_n.shape(), h2)).matrix());
  };
  const Matrix a = sqrt_psd(rho_n.op()).matrix();
  const Matrix b = sqrt_psd(tensor_power(rho, n).op()).matrix();
  const Matrix y = a * b;
  Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector sv = svd.singularValues();
  const double cut = 1e-12 * std::max(sv.size() ? sv(0) : 0.0, 1e-300);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  const Matrix& P = svd.matrixU();
  const Matrix& Q = svd.matrixV();
  Matrix w = P.leftCols(rank) * Q.leftCols(rank).adjoint();
  if (rank < D) {
    // permutation-covariant isometry ker(Y) -> ker(Y^dagger)
    const Matrix k_out = P.rightCols(D - rank) * P.rightCols(D - rank).adjoint();
    const Matrix k_in = Q.rightCols(D - rank) * Q.rightCols(D - rank).adjoint();
    Rng rng(seed);
    const Matrix zz = ginibre(D, D, rng);
    const Matrix x = k_out * twirl_general(zz) * k_in;
    Eigen::JacobiSVD<Matrix> s2(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    w += s2.matrixU().leftCols(D - rank) * s2.matrixV().leftCols(D - rank).adjoint();
    // round-off in the kernel polar factor breaks covariance slightly; restore it
    Eigen::JacobiSVD<Matrix> s3(twirl_general(w), Eigen::ComputeFullU | Eigen::ComputeFullV);
    w = s3.matrixU() * s3.matrixV().adjoint();
  }
  if ((w.adjoint() * w - Matrix::Identity(D, D)).cwiseAbs().maxCoeff() > 1e-8)
    fail(ErrorKind::ConstructionFailed, "environment alignment is not unitary");
  const Matrix c = a * w;  // amplitudes indexed (S^N, E^N)

  // reorder S^N E^N -> (S E)^N
  Vector flat(D * D);
  for (Index s = 0; s < D; ++s)
    for (Index e = 0; e < D; ++e) flat(s * D + e) = c(s, e);
  std::vector<Index> perm;
  for (Index k = 0; k < n; ++k) {
    perm.push_back(k);
    perm.push_back(n + k);
  }
  const Vector v = detail::permute_vector<double>(flat, std::vector<Index>(static_cast<std::size_t>(2 * n), d), perm);

  PurificationPair out;
  out.rho_pur = standard_purification(rho);
  out.rhoN_pur = Pure::normalized(SystemShape::uniform(d * d, n), v);
  out.overlap = std::abs(out.rhoN_pur.amplitudes().dot(tensor_power(out.rho_pur, n).amplitudes()));
  const double f = sv.sum();
  if (std::abs(out.overlap - f) > 1e-8) fail(ErrorKind::ConstructionFailed, "purification overlap differs from the fidelity");
  if (symmetric_residual(out.rhoN_pur) > 1e-8) fail(ErrorKind::ConstructionFailed, "purification is not permutation invariant");
  return out;
}

ConditionedState conditioned_state(const Pure& rhoN_pur, const Pure& rho_pur, Index M) {
  const Index q = rho_pur.dim();
  const Index n = rhoN_pur.shape().subsystems();
  if (rhoN_pur.shape() != SystemShape::uniform(q, n)) fail(ErrorKind::DimensionMismatch, "purification shapes differ");
  if (M < 0 || M > n) fail(ErrorKind::DomainViolation, "need 0 <= M <= N");
  const Pure base(SystemShape({q}), rho_pur.amplitudes(), 1e-9);
  ConditionedState out;
  out.overlap = std::abs(tensor_power(base, n).amplitudes().dot(rhoN_pur.amplitudes()));
  if (M == 0) {
    out.state = rhoN_pur;
    if (!(out.overlap > 1e-12)) fail(ErrorKind::ZeroOverlap, "purifications are orthogonal");
    out.certificate = make_certificate("conditioned_state", 0.0, 1e-9);
    return out;
  }
  const Index rest = ipow(q, n - M);
  const Vector bm = tensor_power(base, M).amplitudes();
  const Eigen::Map<const Matrix> V(rhoN_pur.amplitudes().data(), rest, bm.size());
  const Vector w = V * bm.conjugate();
  if (!(w.norm() > 1e-12) || !(out.overlap > 1e-12)) fail(ErrorKind::ZeroOverlap, "conditioning annihilates rho_N");
  out.state = Pure::normalized(SystemShape::uniform(q, n - M), w);
  const Operator lhs = Operator::outer(out.state.shape(), out.state.amplitudes());
  const Operator rhs = reduced_state(rhoN_pur, first_subsystems(M)).op() / (out.overlap * out.overlap);
  out.certificate = make_certificate("conditioned_state", lambda_min(rhs - lhs), 1e-9);
  return out;
}

Truncation truncate_to_almost_power(const Pure& v, const Pure& base, Index R) {
  const Index n = v.shape().subsystems();
  if (v.shape() != SystemShape::uniform(base.dim(), n)) fail(ErrorKind::DimensionMismatch, "v must live on copies of base");
  if (R < 0) fail(ErrorKind::DomainViolation, "R must be >= 0");
  if (symmetric_residual(v) > 1e-8) fail(ErrorKind::NotPermutationInvariant, "v is not symmetric");
  const auto comps = defect_components(v.amplitudes(), base, n);
  Vector keep = Vector::Zero(v.dim());
  for (Index r = 0; r <= std::min(R, n); ++r) keep += comps[static_cast<std::size_t>(r)];
  if (!(keep.norm() > 1e-14)) fail(ErrorKind::ZeroNorm, "truncation annihilates v");
  Truncation t;
  t.state = Pure::normalized(v.shape(), keep);
  const double ov = std::min(1.0, std::abs(t.state.amplitudes().dot(v.amplitudes())));
  t.distance = 2.0 * std::sqrt(std::max(0.0, 1.0 - ov * ov));
  return t;
}

Pure positive_direction(const Pure& x, const Pure& y, const Pure& fallback) {
  if (x.shape() != y.shape()) fail(ErrorKind::DimensionMismatch, "positive_direction shapes differ");
  const std::complex<double> c = x.amplitudes().dot(y.amplitudes());
  const Vector perp = y.amplitudes() - c * x.amplitudes();
  const double s = perp.norm();
  if (s <= 1e-14) return fallback;
  const Vector e2 = perp / s;
  // |x><x| - |y><y| in the basis {x, e2}, y = (c, s)
  Eigen::Matrix2cd m;
  m << 1.0 - std::norm(c), -c * s, -std::conj(c) * s, -s * s;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
  const Eigen::Vector2cd a = es.eigenvectors().col(1);
  return Pure::normalized(x.shape(), a(0) * x.amplitudes() + a(1) * e2);
}

Density normalized_positive_part(const Operator& a, const Operator& b, const Density& fallback) {
  const Operator p = positive_part(a - b);
  const double t = p.trace();
  if (t <= 1e-14) return fallback;
  return Density::assume_valid(p / t);
}

PowerInequality power_inequality(const Pure& v, const Pure& base, Index N, Index M, Index R) {
  const Index n = N - M;
  if (M < 0 || R < 0 || n < 2 * R) fail(ErrorKind::PremiseFailed, "need N - M >= 2R");
  if (v.shape() != SystemShape::uniform(base.dim(), n)) fail(ErrorKind::DimensionMismatch, "v must live on N-M copies of base");
  const auto comps = defect_components(v.amplitudes(), base, n);
  Vector thr = Vector::Zero(v.dim());
  for (Index r = 0; r <= R; ++r)
    if (comps[static_cast<std::size_t>(r)].norm() >= 1.0 / static_cast<double>(N)) thr += comps[static_cast<std::size_t>(r)];
  PowerInequality out;
  out.thresholded = Pure::normalized(v.shape(), thr);
  out.delta = positive_direction(out.thresholded, v, out.thresholded);

  const double h = n > 0 ? binary_entropy(static_cast<double>(R) / static_cast<double>(n)) : 0.0;
  const double scale = std::exp2(static_cast<double>(N) * h) * static_cast<double>(N * N);
  const double w = 2.0 * std::sqrt(2.0 * static_cast<double>(R)) / static_cast<double>(N);
  const auto traced = first_subsystems(R);
  Operator rhs = reduced_state(v, traced).op() + reduced_state(out.delta, traced).op() * w;
  rhs *= scale;
  const Pure b1(SystemShape({base.dim()}), base.amplitudes(), 1e-9);
  const Index k = n - R;
  const Operator lhs = k > 0 ? Operator::outer(SystemShape::uniform(base.dim(), k), tensor_power(b1, k).amplitudes())
                             : Operator::identity(SystemShape({1}));
  if (k == 0) {
    out.certificate = make_certificate("power_inequality", rhs.trace() - 1.0, 1e-8);
    return out;
  }
  out.certificate = make_certificate("power_inequality", lambda_min(rhs - lhs), 1e-8);
  return out;
}

Certificate verify_power_inequality(const Pure& v, const Pure& base, Index N, Index M, Index R) {
  return power_inequality(v, base, N, M, R).certificate;
}

}  // namespace stein
