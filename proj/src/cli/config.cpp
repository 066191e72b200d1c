#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stein/cli.hpp"
#include "stein/io.hpp"

namespace stein::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || !std::isfinite(x)) fail(ErrorKind::ParseError, key + ": not a real number '" + t + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0') fail(ErrorKind::ParseError, key + ": not an integer '" + t + "'");
  return x;
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, sep))
    if (!trim(tok).empty()) out.push_back(trim(tok));
  return out;
}

// "a, b, c" or "lo:step:hi"
std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  const auto range = split(v, ':');
  if (range.size() == 3) {
    const double lo = parse_real(key, range[0]), step = parse_real(key, range[1]), hi = parse_real(key, range[2]);
    if (!(step > 0) || hi < lo) fail(ErrorKind::ParseError, key + ": bad range");
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  for (const auto& t : split(v, ',')) out.push_back(parse_real(key, t));
  return out;
}

double parse_probability(const std::string& spec, const std::string& v) {
  const double p = parse_real(spec, v);
  if (p < 0 || p > 1) fail(ErrorKind::DomainViolation, spec + ": p must lie in [0, 1]");
  return p;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "family") c.family = val;
    else if (key == "state") c.state = val;
    else if (key == "y_grid") c.y_grid = parse_real_list(key, val);
    else if (key == "N_grid") {
      c.N_grid.clear();
      for (const auto& t : split(val, ',')) c.N_grid.push_back(static_cast<Index>(parse_int(key, t)));
    } else if (key == "y") c.y = parse_real(key, val);
    else if (key == "N") c.N = static_cast<Index>(parse_int(key, val));
    else if (key == "K") c.K = parse_real(key, val);
    else if (key == "epsilon") c.epsilon = parse_real(key, val);
    else if (key == "sandwich_N") c.sandwich_N = static_cast<Index>(parse_int(key, val));
    else if (key == "tol") c.solver.tol = parse_real(key, val);
    else if (key == "max_iters") c.solver.max_iters = static_cast<int>(parse_int(key, val));
    else if (key == "seed") c.solver.seed = static_cast<std::uint64_t>(parse_int(key, val));
    else if (key == "restarts") c.solver.restarts = static_cast<int>(parse_int(key, val));
    else if (key == "out") c.out = val;
    else fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  for (Index n : c.N_grid)
    if (n < 1) fail(ErrorKind::ParseError, "N_grid entries must be >= 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::ParseError, "cannot read " + path);
  return parse_config(f);
}

Density make_state(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "coherence") {
    const double p = parse_probability(spec, arg);
    Vector v(2);
    v << std::sqrt(p), std::sqrt(1.0 - p);
    return Density(Pure(SystemShape{2}, v));
  }
  if (head == "classical") {
    const double p = parse_probability(spec, arg);
    RealVector d(2);
    d << p, 1.0 - p;
    return Density::diagonal(SystemShape{2}, d);
  }
  if (spec == "bell") {
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return Density(Pure(SystemShape{4}, v));
  }
  const Operator a = load_operator(spec);
  return Density(Operator::from_hermitian(SystemShape{a.dim()}, a.matrix()));
}

FreeFamily make_family(const std::string& spec, const Density& single_copy, Index copies, int restarts) {
  const Index d = single_copy.dim();
  if (spec == "diagonal") return FreeFamily::diagonal(d, copies);
  if (spec == "full") return FreeFamily::full_space(d, copies);
  if (spec.rfind("iid:", 0) == 0) {
    const std::string arg = spec.substr(4);
    if (arg == "mixed") return FreeFamily::singleton_iid(Density::maximally_mixed(SystemShape{d}), copies);
    const Operator a = load_operator(arg);
    const Density s0(Operator::from_hermitian(SystemShape{a.dim()}, a.matrix()));
    if (s0.dim() != d) fail(ErrorKind::DimensionMismatch, "sigma0 dimension differs from the state");
    return FreeFamily::singleton_iid(s0, copies);
  }
  if (spec.rfind("sep:", 0) == 0) {
    const std::string arg = spec.substr(4);
    const auto x = arg.find('x');
    if (x == std::string::npos) fail(ErrorKind::ParseError, "expected sep:<dA>x<dB>");
    const auto da = static_cast<Index>(parse_int(spec, arg.substr(0, x)));
    const auto db = static_cast<Index>(parse_int(spec, arg.substr(x + 1)));
    if (da * db != d) fail(ErrorKind::DimensionMismatch, spec + " does not match state dimension " + std::to_string(d));
    return FreeFamily::separable_hull(da, db, copies, restarts);
  }
  fail(ErrorKind::ParseError, "unknown family '" + spec + "'");
}

}  // namespace stein::cli
