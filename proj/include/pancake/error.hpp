#pragma once

#include <stdexcept>
#include <string>

namespace pancake {

enum class ErrorKind {
  InvalidInput,
  DimensionMismatch,
  EmptySelection,
  InfeasibleSpec,
  SizeGuard,
  Divergence,
  DegenerateDirection,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::EmptySelection: return "empty-selection";
    case ErrorKind::InfeasibleSpec: return "infeasible-spec";
    case ErrorKind::SizeGuard: return "size-guard";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::DegenerateDirection: return "degenerate-direction";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pancake
