#include "mbfuse/error.hpp"

namespace mbfuse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicatePair: return "DuplicatePair";
    case ErrorKind::AllScoresMissing: return "AllScoresMissing";
    case ErrorKind::NonFiniteScore: return "NonFiniteScore";
    case ErrorKind::TooFewIdentities: return "TooFewIdentities";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::UnknownModality: return "UnknownModality";
    case ErrorKind::DuplicateCell: return "DuplicateCell";
    case ErrorKind::RaggedRow: return "RaggedRow";
    case ErrorKind::NonNumericScore: return "NonNumericScore";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InventoryMismatch: return "InventoryMismatch";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorKind::InfeasibleLevel: return "InfeasibleLevel";
    case ErrorKind::DegenerateModality: return "DegenerateModality";
    case ErrorKind::EmptyColumn: return "EmptyColumn";
    case ErrorKind::NotEnoughObservedRows: return "NotEnoughObservedRows";
    case ErrorKind::RegressorFitFailure: return "RegressorFitFailure";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::IncompleteWithSkipDisabled: return "IncompleteWithSkipDisabled";
    case ErrorKind::RowWithNoScores: return "RowWithNoScores";
    case ErrorKind::OneClassOnly: return "OneClassOnly";
    case ErrorKind::ProbeWithoutMate: return "ProbeWithoutMate";
    case ErrorKind::ProbeWithMultipleMates: return "ProbeWithMultipleMates";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::CellFailure: return "CellFailure";
  }
  return "Unknown";
}

}  // namespace mbfuse
