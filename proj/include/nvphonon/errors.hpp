#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nvp {

enum class ErrorCode {
  NonPositiveDimension,
  InvalidParameter,
  InvalidQuantumNumber,
  NoRootInBracket,
  DegenerateNullspace,
  PointOutsideSphere,
  QuadratureNotConverged,
  TruncationTooSmall,
  PerturbationInvalid,
  ZeroSeparation,
  DressedResonance,
  QuasiResonantDoubleExcitation,
  WeakDriving,
  UnknownFrame,
  StepSizeUnderflow,
  TruncationLeak,
  InvalidState,
  NoAdmissibleM,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. Numerical invariant failures
/// and precondition violations are both reported this way.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nvp
