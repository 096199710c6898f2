#pragma once

#include <stdexcept>
#include <string>

namespace metocean {

/// Broad classification of failures. The CLI maps these onto exit codes.
enum class ErrorKind {
  Config,
  Input,
  Schema,
  Fit,
  Degenerate,
  Extrapolation,
  Allocation,
  InsufficientTail,
  Resolution,
  Calibration,
  Simulation,
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Input: return "input";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Extrapolation: return "extrapolation";
    case ErrorKind::Allocation: return "allocation";
    case ErrorKind::InsufficientTail: return "insufficient-tail";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Calibration: return "calibration";
    case ErrorKind::Simulation: return "simulation";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace metocean
