#include "vba/error.hpp"

namespace vba {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::BucklingExceeded: return "BucklingExceeded";
    case ErrorCode::OutOfValidityBox: return "OutOfValidityBox";
    case ErrorCode::GapClosed: return "GapClosed";
    case ErrorCode::MalformedTable: return "MalformedTable";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LeftValidityDomain: return "LeftValidityDomain";
    case ErrorCode::StepCollapse: return "StepCollapse";
    case ErrorCode::SymmetricDegenerate: return "SymmetricDegenerate";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NearCritical: return "NearCritical";
    case ErrorCode::NoRange: return "NoRange";
    case ErrorCode::ZeroAcceleration: return "ZeroAcceleration";
    case ErrorCode::BeyondCritical: return "BeyondCritical";
    case ErrorCode::OutOfThermalRange: return "OutOfThermalRange";
    case ErrorCode::OutOfMapRange: return "OutOfMapRange";
    case ErrorCode::RegimeViolation: return "RegimeViolation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace vba
