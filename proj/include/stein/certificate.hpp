#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stein {

struct Certificate {
  std::string name;
  double margin = 0;
  double tolerance = 0;
  bool pass = false;
};

inline Certificate make_certificate(std::string name, double margin, double tolerance) {
  return {std::move(name), margin, tolerance, margin >= -tolerance};
}

inline bool all_pass(const std::vector<Certificate>& cs) {
  for (const auto& c : cs)
    if (!c.pass) return false;
  return true;
}

void write_certificates_csv(std::ostream& os, const std::vector<Certificate>& cs);

}  // namespace stein
