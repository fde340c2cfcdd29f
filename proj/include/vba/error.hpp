#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vba {

enum class ErrorCode {
  InvalidParams,
  BucklingExceeded,
  OutOfValidityBox,
  GapClosed,
  MalformedTable,
  NoConvergence,
  LeftValidityDomain,
  StepCollapse,
  SymmetricDegenerate,
  SingularSystem,
  NearCritical,
  NoRange,
  ZeroAcceleration,
  BeyondCritical,
  OutOfThermalRange,
  OutOfMapRange,
  RegimeViolation,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// True for the errors a capacitance model raises when asked to evaluate
// outside the region it describes.
inline bool is_domain_error(ErrorCode code) {
  return code == ErrorCode::OutOfValidityBox || code == ErrorCode::GapClosed ||
         code == ErrorCode::LeftValidityDomain;
}

}  // namespace vba
