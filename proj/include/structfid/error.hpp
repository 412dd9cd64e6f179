#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace structfid {

enum class ErrorCode {
  CycleDetected,
  InvalidNode,
  OverlappingSet,
  BudgetExceeded,
  InvalidSpec,
  TooFewRows,
  ClassTooSmall,
  EmptyTable,
  SchemaMismatch,
  UnknownCategory,
  NonCategoricalColumn,
  InsufficientRows,
  SingularDesign,
  EmptyCatalog,
  EmptyClass,
  LengthMismatch,
  SingleClassTrain,
  DegenerateReference,
  NotEnoughRows,
  NonFiniteValue,
  ConstantVector,
  InsufficientCells,
  InvalidConfig,
  MissingScm,
  Timeout,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine carries a machine-readable code; the
/// benchmark records the code verbatim in FAILED report cells.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace structfid
