#include "tmat/errors.hpp"

namespace tmat {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::PoleOfGamma: return "PoleOfGamma";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::ForwardSingularity: return "ForwardSingularity";
    case ErrorKind::BranchMismatch: return "BranchMismatch";
    case ErrorKind::BranchExclusion: return "BranchExclusion";
    case ErrorKind::DegenerateEnergy: return "DegenerateEnergy";
    case ErrorKind::ZeroDivisor: return "ZeroDivisor";
    case ErrorKind::DegenerateG: return "DegenerateG";
    case ErrorKind::AtPole: return "AtPole";
    case ErrorKind::SingularShift: return "SingularShift";
    case ErrorKind::SlowConvergence: return "SlowConvergence";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::MissedPole: return "MissedPole";
  }
  return "Unknown";
}

}  // namespace tmat
