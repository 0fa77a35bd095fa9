#include "mmsa/error.hpp"

namespace mmsa {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidExponentMatrix: return "InvalidExponentMatrix";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::SimplexViolation: return "SimplexViolation";
    case ErrorCode::EmptyEvent: return "EmptyEvent";
    case ErrorCode::NonMultilinear: return "NonMultilinear";
    case ErrorCode::NotRegular: return "NotRegular";
    case ErrorCode::CptShapeMismatch: return "CptShapeMismatch";
    case ErrorCode::NonSimplexCpt: return "NonSimplexCpt";
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::StageDegreeMismatch: return "StageDegreeMismatch";
    case ErrorCode::SameStageOnPath: return "SameStageOnPath";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::FeatureToClassEdge: return "FeatureToClassEdge";
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::EmptyVariation: return "EmptyVariation";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::VariedWholeBlock: return "VariedWholeBlock";
    case ErrorCode::OrderPreservingMultiIndex: return "OrderPreservingMultiIndex";
    case ErrorCode::ZeroResidualMass: return "ZeroResidualMass";
    case ErrorCode::OrderPreservingMaximum: return "OrderPreservingMaximum";
    case ErrorCode::OrderPreservingDomain: return "OrderPreservingDomain";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidPhiFunction: return "InvalidPhiFunction";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::OutsideLSensi: return "OutsideLSensi";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::ClassParameterVaried: return "ClassParameterVaried";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::NoModelLoaded: return "NoModelLoaded";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroResidualMass:
    case ErrorCode::OrderPreservingMaximum:
    case ErrorCode::OrderPreservingDomain:
      return ErrorCategory::SchemeDomain;
    case ErrorCode::DimensionTooLarge:
      return ErrorCategory::DimensionGuard;
    case ErrorCode::NoModelLoaded:
      return ErrorCategory::NotFound;
    default:
      return ErrorCategory::Validation;
  }
}

}  // namespace mmsa
