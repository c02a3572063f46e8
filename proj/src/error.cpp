#include "milu/error.hpp"

namespace milu {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::SelfLoopEdge: return "SelfLoopEdge";
    case ErrorCode::OracleSizeExceeded: return "OracleSizeExceeded";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::DuplicateCoordinates: return "DuplicateCoordinates";
    case ErrorCode::NonRectangularGrid: return "NonRectangularGrid";
    case ErrorCode::NonPositivePivot: return "NonPositivePivot";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::DegenerateCut: return "DegenerateCut";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::NotAnMMatrix: return "NotAnMMatrix";
    case ErrorCode::CellNotLeaf: return "CellNotLeaf";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::UngradedTree: return "UngradedTree";
    case ErrorCode::IndefinitePreconditioner: return "IndefinitePreconditioner";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::InnerSolveFailure: return "InnerSolveFailure";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidSystem: return "InvalidSystem";
  }
  return "Unknown";
}

}  // namespace milu
