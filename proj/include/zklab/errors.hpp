#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zklab {

/// Failure classes surfaced by the library. Each maps to a stable CLI exit code.
enum class ErrorKind {
  ConfigError,
  NonConvergence,
  TrivialCollapse,
  SingularSystem,
  BadBracket,
  EigFailure,
  WrongRegime,
  BoxTooSmall,
  BlowupDetected,
  FitDiverged,
  AngleOutOfRange,
  UnknownPreset,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::TrivialCollapse: return "TrivialCollapse";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::BadBracket: return "BadBracket";
    case ErrorKind::EigFailure: return "EigFailure";
    case ErrorKind::WrongRegime: return "WrongRegime";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::BlowupDetected: return "BlowupDetected";
    case ErrorKind::FitDiverged: return "FitDiverged";
    case ErrorKind::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

constexpr int exit_code(ErrorKind kind) {
  return 2 + static_cast<int>(kind);
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace zklab
