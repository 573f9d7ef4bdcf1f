#include "nvphonon/errors.hpp"

namespace nvp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDimension: return "NonPositiveDimension";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidQuantumNumber: return "InvalidQuantumNumber";
    case ErrorCode::NoRootInBracket: return "NoRootInBracket";
    case ErrorCode::DegenerateNullspace: return "DegenerateNullspace";
    case ErrorCode::PointOutsideSphere: return "PointOutsideSphere";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::PerturbationInvalid: return "PerturbationInvalid";
    case ErrorCode::ZeroSeparation: return "ZeroSeparation";
    case ErrorCode::DressedResonance: return "DressedResonance";
    case ErrorCode::QuasiResonantDoubleExcitation: return "QuasiResonantDoubleExcitation";
    case ErrorCode::WeakDriving: return "WeakDriving";
    case ErrorCode::UnknownFrame: return "UnknownFrame";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::TruncationLeak: return "TruncationLeak";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::NoAdmissibleM: return "NoAdmissibleM";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace nvp
