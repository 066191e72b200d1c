#include "stein/freesets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stein/frank_wolfe.hpp"
#include "stein/optim.hpp"
#include "stein/random.hpp"
#include "stein/symmetry.hpp"

namespace stein {

FreeFamily FreeFamily::diagonal(Index d, Index copies) {
  if (d < 1 || copies < 1) fail(ErrorKind::DomainViolation, "family needs d >= 1 and N >= 1");
  FreeFamily f;
  f.kind_ = FamilyKind::Diagonal;
  f.base_dim_ = d;
  f.copies_ = copies;
  return f;
}

FreeFamily FreeFamily::singleton_iid(Density sigma0, Index copies) {
  if (copies < 1) fail(ErrorKind::DomainViolation, "family needs N >= 1");
  if (sigma0.shape().subsystems() != 1) sigma0 = Density::assume_valid(Operator(SystemShape({sigma0.dim()}), sigma0.matrix()));
  FreeFamily f;
  f.kind_ = FamilyKind::SingletonIid;
  f.base_dim_ = sigma0.dim();
  f.copies_ = copies;
  f.sigma0_ = std::move(sigma0);
  return f;
}

FreeFamily FreeFamily::full_space(Index d, Index copies) {
  FreeFamily f = diagonal(d, copies);
  f.kind_ = FamilyKind::FullSpace;
  return f;
}

FreeFamily FreeFamily::separable_hull(Index dim_a, Index dim_b, Index copies, int restarts) {
  if (dim_a < 1 || dim_b < 1 || copies < 1 || restarts < 1) fail(ErrorKind::DomainViolation, "bad separable family");
  FreeFamily f;
  f.kind_ = FamilyKind::SeparableHull;
  f.base_dim_ = dim_a * dim_b;
  f.copies_ = copies;
  f.dim_a_ = dim_a;
  f.dim_b_ = dim_b;
  f.restarts_ = restarts;
  return f;
}

FreeFamily FreeFamily::with_copies(Index copies) const {
  if (copies < 1) fail(ErrorKind::DomainViolation, "family needs N >= 1");
  FreeFamily f = *this;
  f.copies_ = copies;
  return f;
}

std::string FreeFamily::describe() const {
  switch (kind_) {
    case FamilyKind::Diagonal: return "diagonal d=" + std::to_string(base_dim_) + " N=" + std::to_string(copies_);
    case FamilyKind::SingletonIid: return "iid d=" + std::to_string(base_dim_) + " N=" + std::to_string(copies_);
    case FamilyKind::FullSpace: return "full d=" + std::to_string(base_dim_) + " N=" + std::to_string(copies_);
    case FamilyKind::SeparableHull:
      return "sep " + std::to_string(dim_a_) + "x" + std::to_string(dim_b_) + " N=" + std::to_string(copies_);
  }
  return "?";
}

namespace {

void check_shape(const FreeFamily& f, const Operator& a) {
  if (a.dim() != f.total_dim())
    fail(ErrorKind::DimensionMismatch, "operator of dimension " + std::to_string(a.dim()) + " for family " + f.describe());
}

// fine factors [A1,B1,...,AN,BN] -> [A1..AN,B1..BN]
std::vector<Index> fine_dims(Index da, Index db, Index n) {
  std::vector<Index> d;
  for (Index k = 0; k < n; ++k) {
    d.push_back(da);
    d.push_back(db);
  }
  return d;
}
std::vector<Index> a_first(Index n) {
  std::vector<Index> p;
  for (Index k = 0; k < n; ++k) p.push_back(2 * k);
  for (Index k = 0; k < n; ++k) p.push_back(2 * k + 1);
  return p;
}
std::vector<Index> inverse(const std::vector<Index>& p) {
  std::vector<Index> q(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) q[static_cast<std::size_t>(p[k])] = static_cast<Index>(k);
  return q;
}

bool is_product_pure(const Density& sigma, const FreeFamily& f, double tol) {
  const auto s = eigh(sigma.op());
  const Index D = s.values.size();
  if (s.values(D - 1) < 1.0 - tol) return false;
  const Vector v = s.vectors.col(D - 1);
  const Index n = f.copies();
  const Vector w = detail::permute_vector<double>(v, fine_dims(f.dim_a(), f.dim_b(), n), a_first(n));
  const Index DA = static_cast<Index>(std::pow(f.dim_a(), n)), DB = static_cast<Index>(std::pow(f.dim_b(), n));
  const Eigen::Map<const Matrix> W(w.data(), DB, DA);
  const auto sv = Eigen::JacobiSVD<Matrix>(W).singularValues();
  return sv.size() < 2 || sv(1) * sv(1) <= tol;
}

// sigma == sigma_1 (x) ... (x) sigma_N with identical single-copy marginals
bool is_copy_product(const Density& sigma, const FreeFamily& f, double tol, Density& marginal) {
  const Index n = f.copies();
  std::vector<Index> rest;
  for (Index k = 1; k < n; ++k) rest.push_back(k);
  marginal = partial_trace(sigma, rest);
  const Density prod = tensor_power(marginal, n);
  return (prod.matrix() - sigma.matrix()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

Operator partial_transpose_b(const Operator& a, Index dim_a, Index dim_b, Index copies) {
  const auto dims = fine_dims(dim_a, dim_b, copies);
  const auto perm = a_first(copies);
  const Matrix m = detail::permute_matrix<double>(a.matrix(), dims, perm);
  const Index DA = static_cast<Index>(std::pow(dim_a, copies)), DB = static_cast<Index>(std::pow(dim_b, copies));
  Matrix t(m.rows(), m.cols());
  for (Index i = 0; i < DA; ++i)
    for (Index k = 0; k < DA; ++k) t.block(i * DB, k * DB, DB, DB) = m.block(i * DB, k * DB, DB, DB).transpose();
  std::vector<Index> pdims(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) pdims[k] = dims[static_cast<std::size_t>(perm[k])];
  return Operator(a.shape(), detail::permute_matrix<double>(t, pdims, inverse(perm)));
}

double membership_violation(const FreeFamily& f, const Density& sigma) {
  check_shape(f, sigma.op());
  switch (f.kind()) {
    case FamilyKind::Diagonal: {
      const Matrix& m = sigma.matrix();
      return m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum();
    }
    case FamilyKind::SingletonIid:
      return trace_norm(sigma.op() - tensor_power(f.sigma0(), f.copies()).op());
    case FamilyKind::FullSpace:
      return 0.0;
    case FamilyKind::SeparableHull: {
      if (is_product_pure(sigma, f, 1e-12)) return 0.0;
      const double ppt = lambda_min(partial_transpose_b(sigma.op(), f.dim_a(), f.dim_b(), f.copies()));
      if (ppt < -1e-12) return -ppt;
      Density marginal;
      if (f.copies() > 1 && is_copy_product(sigma, f, 1e-13, marginal))
        return membership_violation(f.with_copies(1), marginal);
      // PPT is exact for 2x2 and 2x3
      if (f.copies() == 1 && f.base_dim() <= 6) return 0.0;
      SolverSettings s;
      s.tol = 1e-9;
      s.max_iters = 4000;
      s.restarts = f.restarts();
      return distance_to_family(sigma, f, s).value;
    }
  }
  return std::numeric_limits<double>::infinity();
}

bool membership(const FreeFamily& f, const Density& sigma, double tol) { return membership_violation(f, sigma) <= tol; }

SeesawResult seesaw_min(const Operator& g, Index dim_a, Index dim_b, Index copies, int restarts, std::uint64_t seed,
                        int max_iters, double tol) {
  const auto dims = fine_dims(dim_a, dim_b, copies);
  const auto perm = a_first(copies);
  const Matrix G = detail::permute_matrix<double>(g.matrix(), dims, perm);
  const Index DA = static_cast<Index>(std::pow(dim_a, copies)), DB = static_cast<Index>(std::pow(dim_b, copies));

  // G_a = (I (x) b)^dagger G (I (x) b), G_b = (a (x) I)^dagger G (a (x) I)
  auto reduce_b = [&](const Vector& b) {
    Matrix out(DA, DA);
    for (Index i = 0; i < DA; ++i)
      for (Index k = 0; k < DA; ++k) out(i, k) = b.dot(G.block(i * DB, k * DB, DB, DB) * b);
    return Matrix((out + out.adjoint()) / 2.0);
  };
  auto reduce_a = [&](const Vector& a) {
    Matrix out = Matrix::Zero(DB, DB);
    for (Index i = 0; i < DA; ++i)
      for (Index k = 0; k < DA; ++k) out += std::conj(a(i)) * a(k) * G.block(i * DB, k * DB, DB, DB);
    return Matrix((out + out.adjoint()) / 2.0);
  };
  auto min_vec = [](const Matrix& m, double& val) {
    const auto s = eigh<double>(m);
    val = s.values(0);
    return Vector(s.vectors.col(0));
  };

  Rng rng(seed);
  std::vector<Vector> starts;
  {
    // leading Schmidt vector of the global minimiser
    const auto s = eigh<double>(G);
    const Vector v = s.vectors.col(0);
    const Eigen::Map<const Matrix> V(v.data(), DB, DA);
    Eigen::JacobiSVD<Matrix> svd(V, Eigen::ComputeThinU);
    starts.push_back(svd.matrixU().col(0));
  }
  for (int r = 1; r < restarts; ++r) starts.push_back(ginibre(DB, 1, rng).col(0).normalized());

  SeesawResult best;
  best.value = std::numeric_limits<double>::infinity();
  Vector best_a, best_b;
  for (const Vector& b0 : starts) {
    Vector b = b0, a;
    double val = std::numeric_limits<double>::infinity(), prev = val;
    std::vector<double> hist;
    for (int it = 0; it < max_iters; ++it) {
      a = min_vec(reduce_b(b), val);
      hist.push_back(val);
      b = min_vec(reduce_a(a), val);
      hist.push_back(val);
      if (prev - val <= tol * (1.0 + std::abs(val))) break;
      prev = val;
    }
    if (val < best.value) {
      best.value = val;
      best.history = hist;
      best_a = a;
      best_b = b;
    }
  }
  Vector ab(DA * DB);
  for (Index i = 0; i < DA; ++i) ab.segment(i * DB, DB) = best_a(i) * best_b;
  std::vector<Index> pdims(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) pdims[k] = dims[static_cast<std::size_t>(perm[k])];
  const Vector out = detail::permute_vector<double>(ab, pdims, inverse(perm));
  best.state = Pure::normalized(g.shape(), out);
  return best;
}

Density linear_min_oracle(const FreeFamily& f, const Operator& g, std::uint64_t seed) {
  check_shape(f, g);
  const SystemShape shape = f.shape();
  switch (f.kind()) {
    case FamilyKind::Diagonal: {
      Index k = 0;
      g.matrix().diagonal().real().minCoeff(&k);
      return Density(Pure::basis(shape, k));
    }
    case FamilyKind::SingletonIid:
      return tensor_power(f.sigma0(), f.copies());
    case FamilyKind::FullSpace: {
      const auto s = eigh(g);
      return Density(Pure::normalized(shape, s.vectors.col(0)));
    }
    case FamilyKind::SeparableHull:
      return Density(seesaw_min(g, f.dim_a(), f.dim_b(), f.copies(), f.restarts(), seed).state);
  }
  fail(ErrorKind::DomainViolation, "unknown family");
}

Density full_rank_witness(const FreeFamily& f) {
  if (f.kind() == FamilyKind::SingletonIid) {
    const RealVector ev = eigenvalues(f.sigma0().op());
    if (ev.minCoeff() <= support_cutoff<double>(ev)) fail(ErrorKind::NoFullRankMember, "sigma0 is singular");
    return tensor_power(f.sigma0(), f.copies());
  }
  return Density::maximally_mixed(f.shape());
}

Density some_member(const FreeFamily& f) {
  if (f.kind() == FamilyKind::SingletonIid) return tensor_power(f.sigma0(), f.copies());
  return Density::maximally_mixed(f.shape());
}

Density random_member(const FreeFamily& f, std::uint64_t seed) {
  Rng rng(seed);
  const SystemShape shape = f.shape();
  switch (f.kind()) {
    case FamilyKind::Diagonal: {
      RealVector p = random_probability(shape.total_dim(), rng);
      // occasionally sparse
      if (std::uniform_int_distribution<int>(0, 3)(rng) == 0)
        for (Index k = 0; k < p.size(); ++k)
          if (std::uniform_int_distribution<int>(0, 1)(rng)) p(k) = 0;
      if (p.sum() <= 0) p(0) = 1;
      return Density::assume_valid(Operator::diagonal(shape, p / p.sum()));
    }
    case FamilyKind::SingletonIid:
      return tensor_power(f.sigma0(), f.copies());
    case FamilyKind::FullSpace:
      return random_density(shape, rng, std::uniform_int_distribution<Index>(1, shape.total_dim())(rng));
    case FamilyKind::SeparableHull: {
      const Index n = f.copies();
      const Index DA = static_cast<Index>(std::pow(f.dim_a(), n)), DB = static_cast<Index>(std::pow(f.dim_b(), n));
      const auto dims = fine_dims(f.dim_a(), f.dim_b(), n);
      const auto perm = a_first(n);
      std::vector<Index> pdims(perm.size());
      for (std::size_t k = 0; k < perm.size(); ++k) pdims[k] = dims[static_cast<std::size_t>(perm[k])];
      const int terms = std::uniform_int_distribution<int>(1, 3)(rng);
      const RealVector p = random_probability(terms, rng);
      Matrix acc = Matrix::Zero(shape.total_dim(), shape.total_dim());
      for (int t = 0; t < terms; ++t) {
        const Vector a = ginibre(DA, 1, rng).col(0).normalized();
        const Vector b = ginibre(DB, 1, rng).col(0).normalized();
        Vector ab(DA * DB);
        for (Index i = 0; i < DA; ++i) ab.segment(i * DB, DB) = a(i) * b;
        const Vector v = detail::permute_vector<double>(ab, pdims, inverse(perm));
        acc += p(t) * v * v.adjoint();
      }
      return Density::assume_valid(Operator(shape, acc));
    }
  }
  fail(ErrorKind::DomainViolation, "unknown family");
}

PropertyReport check_property(const FreeFamily& f, int property_id, int trials, std::uint64_t seed) {
  if (property_id < 1 || property_id > 5) fail(ErrorKind::DomainViolation, "property id must be 1..5");
  PropertyReport rep;
  rep.property_id = property_id;
  rep.trials = trials;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  auto draw = [&]() { return rng(); };
  for (int t = 0; t < trials; ++t) {
    double margin = 0;
    switch (property_id) {
      case 1: {
        const Density a = random_member(f, draw()), b = random_member(f, draw());
        const double w = std::uniform_real_distribution<double>(0, 1)(rng);
        margin = -membership_violation(f, mix(a, b, w));
        break;
      }
      case 2: {
        const Density w = full_rank_witness(f);
        margin = lambda_min(w.op()) > 0 ? -membership_violation(f, w) : -1.0;
        break;
      }
      case 3: {
        const FreeFamily g = f.copies() > 1 ? f : f.with_copies(2);
        const Density a = random_member(g, draw());
        const Index n = std::uniform_int_distribution<Index>(0, g.copies() - 1)(rng);
        margin = -membership_violation(g.with_copies(g.copies() - 1), partial_trace(a, {n}));
        break;
      }
      case 4: {
        const Density a = random_member(f.with_copies(1), draw());
        margin = -membership_violation(f, tensor_power(a, f.copies()));
        break;
      }
      case 5: {
        const Density a = random_member(f, draw());
        std::vector<Index> perm = first_subsystems(f.copies());
        std::shuffle(perm.begin(), perm.end(), rng);
        margin = -membership_violation(f, permute_subsystems(a, perm));
        break;
      }
    }
    rep.worst_margin = std::min(rep.worst_margin, margin);
  }
  rep.pass = rep.worst_margin >= -1e-8;
  return rep;
}

}  // namespace stein
