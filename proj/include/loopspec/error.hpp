#pragma once

#include <stdexcept>
#include <string>

namespace loopspec {

enum class ErrorKind {
  // geometry
  NotClosed,
  SelfIntersecting,
  TooFewSamples,
  DegenerateSpeed,
  OffsetTooLarge,
  // longitudinal / transverse / strip
  GridTooCoarse,
  ConvergenceFailure,
  HalfwidthTooLarge,
  NoNegativeEigenvalue,
  CouplingTooWeak,
  MeshTooCoarse,
  FactorizationFailure,
  // bracketing
  InvalidBeta,
  HypothesisViolated,
  ExclusionUnverified,
  WindowTooSmall,
  // configuration
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::SelfIntersecting: return "SelfIntersecting";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::DegenerateSpeed: return "DegenerateSpeed";
    case ErrorKind::OffsetTooLarge: return "OffsetTooLarge";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::HalfwidthTooLarge: return "HalfwidthTooLarge";
    case ErrorKind::NoNegativeEigenvalue: return "NoNegativeEigenvalue";
    case ErrorKind::CouplingTooWeak: return "CouplingTooWeak";
    case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::InvalidBeta: return "InvalidBeta";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::ExclusionUnverified: return "ExclusionUnverified";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace loopspec
