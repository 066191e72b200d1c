#pragma once

#include <cstdint>
#include <random>

#include "stein/opalg.hpp"

namespace stein {

using Rng = std::mt19937_64;

inline Matrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = {g(rng), g(rng)};
  return m;
}

inline Operator random_hermitian(const SystemShape& shape, Rng& rng) {
  const Index d = shape.total_dim();
  return Operator(shape, ginibre(d, d, rng));
}

inline Matrix random_unitary(Index d, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(ginibre(d, d, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (Index k = 0; k < d; ++k) {
    const auto z = r(k, k);
    if (std::abs(z) > 0) q.col(k) *= z / std::abs(z);
  }
  return q;
}

inline Pure random_pure(const SystemShape& shape, Rng& rng) {
  return Pure::normalized(shape, ginibre(shape.total_dim(), 1, rng).col(0));
}

// Induced measure: G G^dagger / Tr with G of size d x rank.
inline Density random_density(const SystemShape& shape, Rng& rng, Index rank = -1) {
  const Index d = shape.total_dim();
  const Index k = rank > 0 ? rank : d;
  const Matrix g = ginibre(d, k, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return Density::assume_valid(Operator(shape, rho));
}

inline RealVector random_probability(Index d, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  RealVector p(d);
  for (Index k = 0; k < d; ++k) p(k) = e(rng);
  return p / p.sum();
}

// Stinespring isometry cut into Kraus operators.
inline KrausList<double> random_channel(Index din, Index dout, Index nkraus, Rng& rng) {
  const Matrix u = random_unitary(dout * nkraus, rng);
  const Matrix v = u.leftCols(din);
  KrausList<double> ks;
  for (Index k = 0; k < nkraus; ++k) ks.push_back(v.middleRows(k * dout, dout));
  return ks;
}

}  // namespace stein
