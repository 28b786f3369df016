#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowrisk {

enum class ErrorKind {
  FileUnreadable,
  SchemaViolation,
  MissingColumn,
  UnknownColumn,
  OutOfZone,
  NonConvergence,
  DegenerateLine,
  DanglingReference,
  FutureDate,
  EmptyColumn,
  EmptyInput,
  DegenerateClass,
  TooFewRows,
  NotSymmetric,
  BadK,
  SingleClass,
  KTooLarge,
  NotFitted,
  LengthMismatch,
  SingleClassTest,
  SingleCluster,
  InfeasiblePacking,
  InvalidArgument,
  MissingArtifact,
  SchemaHashMismatch,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every recoverable failure in the library is reported as an Error carrying
/// its kind, so callers (and the CLI's exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace flowrisk
