#include "mlecrn/error.hpp"

namespace mlecrn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::UnequalColumnSums: return "UnequalColumnSums";
    case ErrorCode::ZeroColumnSum: return "ZeroColumnSum";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NegativeStoichiometry: return "NegativeStoichiometry";
    case ErrorCode::TooManySpecies: return "TooManySpecies";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::NonPositiveX: return "NonPositiveX";
    case ErrorCode::NonPositiveTheta: return "NonPositiveTheta";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorCode::PolytopeEmptyOrBoundary: return "PolytopeEmptyOrBoundary";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NotInToricVariety: return "NotInToricVariety";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UndeclaredCoefficient: return "UndeclaredCoefficient";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace mlecrn
