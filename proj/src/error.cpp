#include "flowrisk/error.hpp"

namespace flowrisk {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::FileUnreadable: return "FileUnreadable";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::OutOfZone: return "OutOfZone";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DegenerateLine: return "DegenerateLine";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::FutureDate: return "FutureDate";
    case ErrorKind::EmptyColumn: return "EmptyColumn";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateClass: return "DegenerateClass";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::NotFitted: return "NotFitted";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SingleClassTest: return "SingleClassTest";
    case ErrorKind::SingleCluster: return "SingleCluster";
    case ErrorKind::InfeasiblePacking: return "InfeasiblePacking";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::SchemaHashMismatch: return "SchemaHashMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace flowrisk
