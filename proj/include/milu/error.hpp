#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace milu {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  AsymmetricInput,
  NegativeWeight,
  SelfLoopEdge,
  OracleSizeExceeded,
  MalformedFile,
  DuplicateCoordinates,
  NonRectangularGrid,
  NonPositivePivot,
  InvalidDimension,
  EmptyDomain,
  DegenerateCut,
  NoSignChange,
  GridTooSmall,
  NotAnMMatrix,
  CellNotLeaf,
  NonPositiveSigma,
  UngradedTree,
  IndefinitePreconditioner,
  MaxIterations,
  InnerSolveFailure,
  NotPositiveDefinite,
  InvalidSystem,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code and
/// an optional free-form context string (offending vertex, file line, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string context = {})
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace milu
