#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kktscope {

enum class UnaryOp { kNeg, kSin, kCos, kExp, kLog, kSqrt };
enum class BinaryOp { kAdd, kSub, kMul, kDiv, kPow };

struct Node;

/// Immutable arithmetic expression tree. Copies share structure.
///
/// The exponent of a `^` node is always a constant; the factory rejects
/// anything else so that differentiation stays closed-form.
class Expr {
 public:
  static Expr constant(double value);
  static Expr variable(std::string name);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  const Node& node() const { return *node_; }

  std::optional<double> constant_value() const;
  bool is_constant() const { return constant_value().has_value(); }

  /// Prints with minimal parentheses; the result reparses to an identical tree.
  std::string to_string() const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

struct ConstantNode {
  double value;
};

struct VariableNode {
  std::string name;
};

struct UnaryNode {
  UnaryOp op;
  Expr operand;
};

struct BinaryNode {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};

struct Node {
  std::variant<ConstantNode, VariableNode, UnaryNode, BinaryNode> data;
};

using Binding = std::map<std::string, double, std::less<>>;

bool is_identifier(std::string_view name);

/// Parses `text` into a tree.
///
/// Precedence from tightest: `^` (right-assoc), unary minus, `*` `/`, `+` `-`.
/// Unary minus applied directly to a numeric literal folds into a negative
/// constant. A `^` exponent must be free of variables; variable-free exponent
/// subtrees are folded to a single constant.
Expr parse_expression(std::string_view text);

double evaluate(const Expr& expr, const Binding& binding);

/// Exact symbolic derivative. Literal subtrees are folded and the identities
/// x+0, x*1, x*0, x^1 are applied; nothing else is simplified.
Expr differentiate(const Expr& expr, std::string_view var);

std::vector<double> gradient(const Expr& expr, std::span<const std::string> vars,
                             std::span<const double> point);

std::set<std::string> variables_of(const Expr& expr);

bool structurally_equal(const Expr& a, const Expr& b);

/// Folding constructors used by the differentiator.
Expr fold_add(Expr a, Expr b);
Expr fold_sub(Expr a, Expr b);
Expr fold_mul(Expr a, Expr b);
Expr fold_div(Expr a, Expr b);
Expr fold_pow(Expr base, double exponent);
Expr fold_unary(UnaryOp op, Expr operand);

/// An expression bound to a fixed variable ordering and flattened to a
/// postfix program, for evaluation in tight loops.
class CompiledExpr {
 public:
  CompiledExpr(const Expr& expr, std::span<const std::string> vars);

  /// Same arithmetic and error behavior as `evaluate`.
  double operator()(std::span<const double> point) const;

  std::size_t arity() const { return arity_; }

 private:
  enum class Code : unsigned char { kConst, kVar, kUnary, kBinary };
  struct Instr {
    Code code;
    unsigned char op;
    std::size_t index;
    double value;
  };

  void emit(const Expr& expr, std::span<const std::string> vars, std::size_t depth);

  std::vector<Instr> program_;
  std::size_t max_depth_ = 0;
  std::size_t arity_ = 0;
};

namespace detail {
double apply_unary(UnaryOp op, double x);
double apply_binary(BinaryOp op, double a, double b);
}  // namespace detail

}  // namespace kktscope
