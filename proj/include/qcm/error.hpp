#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcm {

enum class ErrorKind {
  EmptyOrSingleton,
  RatioOutOfRange,
  ClassViolation,
  DimensionMismatch,
  LetterOutOfRange,
  ExplosionGuard,
  DimensionCapExceeded,
  PrefixTooLong,
  ShapeMismatch,
  CoordCountMismatch,
  NegativeScale,
  NotOrthogonal,
  OverlappingPieces,
  NonFiniteEntry,
  InvalidP,
  ResolutionExceedsLevel,
  BoundChainViolation,
  InvalidParams,
  BudgetZeroWithNoSeed,
  CapExceeded,
  NotStabilized,
  NormalizationViolation,
  RatioBoundViolation,
  ConfigError,
  InvariantFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Resource caps map to a dedicated CLI exit code.
constexpr bool is_resource_cap(ErrorKind kind) noexcept {
  return kind == ErrorKind::ExplosionGuard || kind == ErrorKind::DimensionCapExceeded ||
         kind == ErrorKind::CapExceeded;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyOrSingleton: return "EmptyOrSingleton";
    case ErrorKind::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorKind::ClassViolation: return "ClassViolation";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LetterOutOfRange: return "LetterOutOfRange";
    case ErrorKind::ExplosionGuard: return "ExplosionGuard";
    case ErrorKind::DimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorKind::PrefixTooLong: return "PrefixTooLong";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::CoordCountMismatch: return "CoordCountMismatch";
    case ErrorKind::NegativeScale: return "NegativeScale";
    case ErrorKind::NotOrthogonal: return "NotOrthogonal";
    case ErrorKind::OverlappingPieces: return "OverlappingPieces";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::InvalidP: return "InvalidP";
    case ErrorKind::ResolutionExceedsLevel: return "ResolutionExceedsLevel";
    case ErrorKind::BoundChainViolation: return "BoundChainViolation";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::BudgetZeroWithNoSeed: return "BudgetZeroWithNoSeed";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::NotStabilized: return "NotStabilized";
    case ErrorKind::NormalizationViolation: return "NormalizationViolation";
    case ErrorKind::RatioBoundViolation: return "RatioBoundViolation";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InvariantFailure: return "InvariantFailure";
  }
  return "Unknown";
}

}  // namespace qcm
