#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hytube {

enum class ErrorKind {
  DimensionMismatch,
  SingularShape,
  StepTooLarge,
  DomainViolation,
  MaxSteps,
  DegenerateSlice,
  NoWindow,
  NoVerifiableScale,
  SingularAngle,
  InvalidState,
  NoImpact,
  NonTransversalCrossing,
  FiniteDifferenceInconsistent,
  Uncontrollable,
  SpectralRadiusTooLarge,
  InfeasibleGait,
  DivergentDescent,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularShape: return "SingularShape";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::MaxSteps: return "MaxSteps";
    case ErrorKind::DegenerateSlice: return "DegenerateSlice";
    case ErrorKind::NoWindow: return "NoWindow";
    case ErrorKind::NoVerifiableScale: return "NoVerifiableScale";
    case ErrorKind::SingularAngle: return "SingularAngle";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::NoImpact: return "NoImpact";
    case ErrorKind::NonTransversalCrossing: return "NonTransversalCrossing";
    case ErrorKind::FiniteDifferenceInconsistent: return "FiniteDifferenceInconsistent";
    case ErrorKind::Uncontrollable: return "Uncontrollable";
    case ErrorKind::SpectralRadiusTooLarge: return "SpectralRadiusTooLarge";
    case ErrorKind::InfeasibleGait: return "InfeasibleGait";
    case ErrorKind::DivergentDescent: return "DivergentDescent";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hytube
