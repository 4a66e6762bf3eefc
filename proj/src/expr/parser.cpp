#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "kktscope/errors.hpp"
#include "kktscope/expr.hpp"

namespace kktscope {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    skip_space();
    if (at_end()) throw SyntaxError(pos_, "expression");
    Expr result = parse_sum();
    skip_space();
    if (!at_end()) throw SyntaxError(pos_, "operator or end of input");
    return result;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (consume('+')) {
        lhs = Expr::binary(BinaryOp::kAdd, lhs, parse_product());
      } else if (consume('-')) {
        lhs = Expr::binary(BinaryOp::kSub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (consume('*')) {
        lhs = Expr::binary(BinaryOp::kMul, lhs, parse_unary());
      } else if (consume('/')) {
        lhs = Expr::binary(BinaryOp::kDiv, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  bool next_is_number() {
    skip_space();
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }

  // A literal directly after a minus sign becomes a negative constant,
  // unless the literal is itself the base of a power: -2^2 is -(2^2).
  std::optional<Expr> try_negative_literal() {
    if (!next_is_number()) return std::nullopt;
    const std::size_t saved = pos_;
    const double value = parse_number();
    skip_space();
    if (peek() == '^') {
      pos_ = saved;
      return std::nullopt;
    }
    return Expr::constant(-value);
  }

  Expr parse_unary() {
    if (consume('-')) {
      if (auto literal = try_negative_literal()) return *literal;
      return Expr::unary(UnaryOp::kNeg, parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!consume('^')) return base;
    skip_space();
    const std::size_t exponent_offset = pos_;
    Expr exponent = parse_exponent();
    if (!variables_of(exponent).empty()) throw NonConstantExponent(exponent_offset);
    if (!exponent.is_constant()) exponent = Expr::constant(evaluate(exponent, {}));
    return Expr::binary(BinaryOp::kPow, base, exponent);
  }

  Expr parse_exponent() {
    if (consume('-')) {
      if (auto literal = try_negative_literal()) return *literal;
      return Expr::unary(UnaryOp::kNeg, parse_exponent());
    }
    return parse_power();
  }

  double parse_number() {
    skip_space();
    const std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (pos_ == start + 1 && text_[start] == '.') throw SyntaxError(start, "number");
    if (peek() == 'e' || peek() == 'E') {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value)) {
      throw SyntaxError(start, "finite number");
    }
    return value;
  }

  std::string parse_identifier() {
    const std::size_t start = pos_;
    while (!at_end()) {
      const char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        ++pos_;
      } else {
        break;
      }
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  static std::optional<UnaryOp> function_named(std::string_view name) {
    if (name == "sin") return UnaryOp::kSin;
    if (name == "cos") return UnaryOp::kCos;
    if (name == "exp") return UnaryOp::kExp;
    if (name == "log") return UnaryOp::kLog;
    if (name == "sqrt") return UnaryOp::kSqrt;
    return std::nullopt;
  }

  Expr parse_primary() {
    skip_space();
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Expr::constant(parse_number());
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      std::string name = parse_identifier();
      const std::size_t after_name = pos_;
      if (consume('(')) {
        const auto fn = function_named(name);
        if (!fn) throw SyntaxError(start, "known function (sin, cos, exp, log, sqrt)");
        Expr argument = parse_sum();
        if (!consume(')')) throw SyntaxError(pos_, "')'");
        return Expr::unary(*fn, argument);
      }
      pos_ = after_name;
      return Expr::variable(std::move(name));
    }
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (!consume(')')) throw SyntaxError(pos_, "')'");
      return inner;
    }
    if (at_end()) throw SyntaxError(pos_, "operand before end of input");
    throw SyntaxError(pos_, "number, variable, function call or '('");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

}  // namespace kktscope
