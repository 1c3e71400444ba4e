#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlecrn {

enum class ErrorCode {
  EmptyMatrix,
  UnequalColumnSums,
  ZeroColumnSum,
  Overflow,
  NegativeStoichiometry,
  TooManySpecies,
  NonPositiveAlpha,
  NonPositiveX,
  NonPositiveTheta,
  DimensionMismatch,
  NonFiniteState,
  DeltaTooLarge,
  PolytopeEmptyOrBoundary,
  NonConvergence,
  NotInToricVariety,
  InvalidData,
  ParseError,
  UndeclaredCoefficient,
  Internal,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this one exception type; the code
// is what the CLI maps to exit statuses and structured JSON errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mlecrn
