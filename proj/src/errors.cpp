#include "kktscope/errors.hpp"

namespace kktscope {

const char* error_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax: return "expression";
    case ErrorKind::kNonConstantExponent: return "expression";
    case ErrorKind::kUnboundVariable: return "unbound-variable";
    case ErrorKind::kNumericDomain: return "numeric-domain";
    case ErrorKind::kVariableNameClash: return "name-clash";
    case ErrorKind::kZeroConstraintGradient: return "zero-constraint-gradient";
    case ErrorKind::kZeroObjectiveGradient: return "zero-objective-gradient";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kSimplexViolation: return "simplex";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kPremiseViolation: return "premise";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kSchema: return "schema";
  }
  return "unknown";
}

SyntaxError::SyntaxError(std::size_t offset, const std::string& expected)
    : Error(ErrorKind::kSyntax,
            "syntax error at offset " + std::to_string(offset) + ": expected " + expected),
      offset_(offset),
      expected_(expected) {}

NonConstantExponent::NonConstantExponent(std::size_t offset)
    : Error(ErrorKind::kNonConstantExponent,
            "exponent at offset " + std::to_string(offset) + " must be a constant"),
      offset_(offset) {}

}  // namespace kktscope
