#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stein {

enum class ErrorKind {
  DimensionMismatch,
  IndexOutOfRange,
  NegativeEigenvalue,
  NotTracePreserving,
  InvalidState,
  DomainViolation,
  SingularSigma,
  PremiseFailed,
  NoFullRankMember,
  ConstraintUncertified,
  MaxItersExceeded,
  DimensionCap,
  NotOrthogonal,
  NotPermutationInvariant,
  ZeroOverlap,
  ZeroNorm,
  Infeasible,
  ConstructionFailed,
  PremiseOutOfInterval,
  CertificateFailed,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::NotTracePreserving: return "NotTracePreserving";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::SingularSigma: return "SingularSigma";
    case ErrorKind::PremiseFailed: return "PremiseFailed";
    case ErrorKind::NoFullRankMember: return "NoFullRankMember";
    case ErrorKind::ConstraintUncertified: return "ConstraintUncertified";
    case ErrorKind::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorKind::DimensionCap: return "DimensionCap";
    case ErrorKind::NotOrthogonal: return "NotOrthogonal";
    case ErrorKind::NotPermutationInvariant: return "NotPermutationInvariant";
    case ErrorKind::ZeroOverlap: return "ZeroOverlap";
    case ErrorKind::ZeroNorm: return "ZeroNorm";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::ConstructionFailed: return "ConstructionFailed";
    case ErrorKind::PremiseOutOfInterval: return "PremiseOutOfInterval";
    case ErrorKind::CertificateFailed: return "CertificateFailed";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace stein
