#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvp {

enum class ErrorKind {
  // geometry
  EmptyClass,
  DimensionMismatch,
  DegenerateDirection,
  DuplicateId,
  NonFinite,
  // corpus
  OutOfScale,
  EmptyInput,
  Malformed,
  MissingColumn,
  EmptyFile,
  // metrics
  TooFewPoints,
  ZeroVariance,
  InsufficientData,
  InsufficientOverlap,
  EmptyScoreSet,
  // baselines
  UnknownLabel,
  // providers
  BadHeader,
  TruncatedFile,
  NoOverlap,
  EndpointUnreachable,
  ProtocolError,
  DimensionDrift,
  // analysis
  BadWindow,
  DegenerateReference,
  // pipeline
  InvalidArgument,
  Io,
  Leakage,
  Internal,
};

std::string_view to_string(ErrorKind kind);

// Broad class of an error, used by the CLI to pick an exit code.
enum class ErrorClass { User, Data, Internal };
ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cvp
