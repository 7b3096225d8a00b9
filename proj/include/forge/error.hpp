#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class ErrorCode {
  EmptyBody,
  MissingIdentity,
  InvalidWindow,
  DimensionMismatch,
  BackendFailure,
  SchemaViolation,
  GroundingViolation,
  MixedDocuments,
  ParseError,
  DuplicateConcept,
  OutOfRange,
  SelfMerge,
  ScoreOrderViolation,
  MissingYear,
  UnknownEvidence,
  UnlinkedEntity,
  UnknownEndpoint,
  SelfLoop,
  DuplicateEdge,
  SchemaMismatch,
  UnknownNode,
  UnparseableAnswer,
  EmptySet,
  NoEligiblePairs,
  DegenerateLabels,
  InvariantViolation,
  PreconditionViolation,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown by the library. `code()` is stable and
/// is what the CLI reports in its machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace forge
