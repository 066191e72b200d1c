#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "stein/opalg.hpp"

namespace stein {

// dims: d1,d2,...  then "row col re im" for each nonzero upper-triangle entry
inline void write_operator(std::ostream& os, const Operator& a) {
  os << "dims: " << a.shape().str() << '\n';
  char buf[128];
  const auto& m = a.matrix();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i; j < m.cols(); ++j) {
      const auto z = m(i, j);
      if (z == std::complex<double>(0)) continue;
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g\n", static_cast<long long>(i), static_cast<long long>(j),
                    z.real(), i == j ? 0.0 : z.imag());
      os << buf;
    }
}

inline Operator read_operator(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("dims:", 0) != 0) fail(ErrorKind::ParseError, "missing dims header");
  std::vector<Index> dims;
  std::stringstream hs(line.substr(5));
  std::string tok;
  while (std::getline(hs, tok, ',')) {
    char* end = nullptr;
    const long long d = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str()) fail(ErrorKind::ParseError, "bad dimension '" + tok + "'");
    dims.push_back(static_cast<Index>(d));
  }
  SystemShape shape(dims);
  Matrix m = Matrix::Zero(shape.total_dim(), shape.total_dim());
  long long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    const long long i = std::strtoll(p, &end, 10);
    if (end == p) fail(ErrorKind::ParseError, "line " + std::to_string(lineno));
    p = end;
    const long long j = std::strtoll(p, &end, 10);
    if (end == p) fail(ErrorKind::ParseError, "line " + std::to_string(lineno));
    p = end;
    const double re = std::strtod(p, &end);
    if (end == p) fail(ErrorKind::ParseError, "line " + std::to_string(lineno));
    p = end;
    const double im = std::strtod(p, &end);
    if (end == p) fail(ErrorKind::ParseError, "line " + std::to_string(lineno));
    if (i < 0 || j < i || j >= shape.total_dim()) fail(ErrorKind::IndexOutOfRange, "entry outside upper triangle, line " + std::to_string(lineno));
    m(i, j) = {re, i == j ? 0.0 : im};
    m(j, i) = std::conj(m(i, j));
  }
  return Operator::from_hermitian(shape, m);
}

inline void save_operator(const std::string& path, const Operator& a) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::ParseError, "cannot write " + path);
  write_operator(f, a);
}

inline Operator load_operator(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::ParseError, "cannot read " + path);
  return read_operator(f);
}

}  // namespace stein
