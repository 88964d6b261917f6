#include "cvp/error.hpp"

namespace cvp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateDirection: return "DegenerateDirection";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::OutOfScale: return "OutOfScale";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::Malformed: return "Malformed";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorKind::EmptyScoreSet: return "EmptyScoreSet";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::EndpointUnreachable: return "EndpointUnreachable";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::DimensionDrift: return "DimensionDrift";
    case ErrorKind::BadWindow: return "BadWindow";
    case ErrorKind::DegenerateReference: return "DegenerateReference";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Leakage: return "Leakage";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
    case ErrorKind::Leakage:
    case ErrorKind::EndpointUnreachable:
      return ErrorClass::User;
    case ErrorKind::Internal:
      return ErrorClass::Internal;
    default:
      return ErrorClass::Data;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace cvp
