#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmsa {

enum class ErrorCode {
  // mm-core
  IndexOutOfRange,
  ShapeMismatch,
  InvalidExponentMatrix,
  InvalidPartition,
  SimplexViolation,
  EmptyEvent,
  NonMultilinear,
  NotRegular,
  // compilers
  CptShapeMismatch,
  NonSimplexCpt,
  NotATree,
  StageDegreeMismatch,
  SameStageOnPath,
  UnknownVariable,
  UnknownState,
  FeatureToClassEdge,
  CyclicGraph,
  // covariation
  EmptyVariation,
  TargetOutOfRange,
  VariedWholeBlock,
  OrderPreservingMultiIndex,
  ZeroResidualMass,
  OrderPreservingMaximum,
  OrderPreservingDomain,
  // divergences
  LengthMismatch,
  InvalidDistribution,
  InvalidPhiFunction,
  UnknownMetric,
  // sensitivity
  GridTooCoarse,
  OutsideLSensi,
  DimensionTooLarge,
  ClassParameterVaried,
  // io / service
  ParseError,
  UnknownParameter,
  NoModelLoaded,
};

/// How an error should be surfaced by the service layer.
enum class ErrorCategory { Validation, SchemeDomain, DimensionGuard, NotFound };

std::string_view error_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }
  ErrorCategory category() const noexcept { return error_category(code_); }

 private:
  ErrorCode code_;
};

}  // namespace mmsa
