#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmat {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  PoleOfGamma,
  ConvergenceFailure,
  DomainError,
  IndexError,
  ForwardSingularity,
  BranchMismatch,
  BranchExclusion,
  DegenerateEnergy,
  ZeroDivisor,
  DegenerateG,
  AtPole,
  SingularShift,
  SlowConvergence,
  QuadratureFailure,
  IllConditioned,
  MissedPole,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures caused by bad inputs rather than numerics.
  bool is_config_error() const noexcept {
    return kind_ == ErrorKind::InvalidArgument || kind_ == ErrorKind::IndexError ||
           kind_ == ErrorKind::BranchMismatch || kind_ == ErrorKind::ForwardSingularity;
  }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace tmat
