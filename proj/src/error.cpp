#include "structfid/error.hpp"

namespace structfid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::InvalidNode: return "InvalidNode";
    case ErrorCode::OverlappingSet: return "OverlappingSet";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::NonCategoricalColumn: return "NonCategoricalColumn";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleClassTrain: return "SingleClassTrain";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::NotEnoughRows: return "NotEnoughRows";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ConstantVector: return "ConstantVector";
    case ErrorCode::InsufficientCells: return "InsufficientCells";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingScm: return "MissingScm";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace structfid
