#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kktscope {

enum class ErrorKind {
  kSyntax,
  kNonConstantExponent,
  kUnboundVariable,
  kNumericDomain,
  kVariableNameClash,
  kZeroConstraintGradient,
  kZeroObjectiveGradient,
  kDimension,
  kSimplexViolation,
  kInvalidArgument,
  kPremiseViolation,
  kIo,
  kSchema,
};

/// Short stable token for an error kind, used in `ERROR <code>: ...` lines.
const char* error_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& expected);

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class NonConstantExponent : public Error {
 public:
  explicit NonConstantExponent(std::size_t offset);

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error(ErrorKind::kUnboundVariable, "unbound variable '" + name + "'"), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class NumericDomainError : public Error {
 public:
  explicit NumericDomainError(const std::string& message)
      : Error(ErrorKind::kNumericDomain, message) {}
};

/// A syntax error inside an expression field of a problem file.
class ExpressionError : public Error {
 public:
  ExpressionError(const std::string& field, std::size_t offset, const std::string& message)
      : Error(ErrorKind::kSyntax, field + ": " + message), field_(field), offset_(offset) {}

  const std::string& field() const { return field_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string field_;
  std::size_t offset_;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& field, const std::string& message)
      : Error(ErrorKind::kSchema, field + ": " + message), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace kktscope
