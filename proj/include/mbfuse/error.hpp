#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mbfuse {

enum class ErrorKind {
  DuplicatePair,
  AllScoresMissing,
  NonFiniteScore,
  TooFewIdentities,
  MalformedLine,
  UnknownModality,
  DuplicateCell,
  RaggedRow,
  NonNumericScore,
  ShapeMismatch,
  InventoryMismatch,
  IoFailure,
  InvalidSpec,
  LevelOutOfRange,
  InfeasibleLevel,
  DegenerateModality,
  EmptyColumn,
  NotEnoughObservedRows,
  RegressorFitFailure,
  TooFewRows,
  NotNormalized,
  IncompleteWithSkipDisabled,
  RowWithNoScores,
  OneClassOnly,
  ProbeWithoutMate,
  ProbeWithMultipleMates,
  InvalidConfig,
  CellFailure,
};

std::string_view to_string(ErrorKind kind);

// Every data or validation failure in the library is reported through this
// type. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mbfuse
