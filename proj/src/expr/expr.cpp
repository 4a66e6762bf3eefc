#include <cctype>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "kktscope/errors.hpp"
#include "kktscope/expr.hpp"

namespace kktscope {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Expr Expr::constant(double value) {
  return Expr(std::make_shared<const Node>(Node{ConstantNode{value}}));
}

Expr Expr::variable(std::string name) {
  if (!is_identifier(name)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid variable name '" + name + "'");
  }
  return Expr(std::make_shared<const Node>(Node{VariableNode{std::move(name)}}));
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  return Expr(std::make_shared<const Node>(Node{UnaryNode{op, std::move(operand)}}));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  if (op == BinaryOp::kPow && !rhs.is_constant()) throw NonConstantExponent(0);
  return Expr(
      std::make_shared<const Node>(Node{BinaryNode{op, std::move(lhs), std::move(rhs)}}));
}

std::optional<double> Expr::constant_value() const {
  if (const auto* c = std::get_if<ConstantNode>(&node_->data)) return c->value;
  return std::nullopt;
}

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  const auto head = static_cast<unsigned char>(name.front());
  if (!std::isalpha(head) && name.front() != '_') return false;
  for (const char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

namespace detail {

double apply_unary(UnaryOp op, double x) {
  double result = 0.0;
  switch (op) {
    case UnaryOp::kNeg: result = -x; break;
    case UnaryOp::kSin: result = std::sin(x); break;
    case UnaryOp::kCos: result = std::cos(x); break;
    case UnaryOp::kExp: result = std::exp(x); break;
    case UnaryOp::kLog:
      if (!(x > 0.0)) throw NumericDomainError(fmt::format("log of nonpositive value {}", x));
      result = std::log(x);
      break;
    case UnaryOp::kSqrt:
      if (!(x >= 0.0)) throw NumericDomainError(fmt::format("sqrt of negative value {}", x));
      result = std::sqrt(x);
      break;
  }
  if (!std::isfinite(result)) throw NumericDomainError("non-finite result");
  return result;
}

double apply_binary(BinaryOp op, double a, double b) {
  double result = 0.0;
  switch (op) {
    case BinaryOp::kAdd: result = a + b; break;
    case BinaryOp::kSub: result = a - b; break;
    case BinaryOp::kMul: result = a * b; break;
    case BinaryOp::kDiv:
      if (b == 0.0) throw NumericDomainError("division by zero");
      result = a / b;
      break;
    case BinaryOp::kPow: result = std::pow(a, b); break;
  }
  if (!std::isfinite(result)) throw NumericDomainError("non-finite result");
  return result;
}

}  // namespace detail

double evaluate(const Expr& expr, const Binding& binding) {
  return std::visit(
      Overloaded{
          [](const ConstantNode& n) { return n.value; },
          [&](const VariableNode& n) {
            const auto it = binding.find(n.name);
            if (it == binding.end()) throw UnboundVariable(n.name);
            if (!std::isfinite(it->second)) {
              throw NumericDomainError("variable '" + n.name + "' bound to non-finite value");
            }
            return it->second;
          },
          [&](const UnaryNode& n) {
            return detail::apply_unary(n.op, evaluate(n.operand, binding));
          },
          [&](const BinaryNode& n) {
            const double lhs = evaluate(n.lhs, binding);
            return detail::apply_binary(n.op, lhs, evaluate(n.rhs, binding));
          },
      },
      expr.node().data);
}

// ---------------------------------------------------------------------------
// folding constructors

namespace {

bool is_value(const Expr& e, double v) {
  const auto c = e.constant_value();
  return c && *c == v;
}

std::optional<Expr> fold_constant(std::optional<double> value) {
  if (value && std::isfinite(*value)) return Expr::constant(*value);
  return std::nullopt;
}

template <class F>
std::optional<double> try_apply(F&& f) {
  try {
    return f();
  } catch (const NumericDomainError&) {
    return std::nullopt;
  }
}

}  // namespace

Expr fold_add(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto c = fold_constant(*a.constant_value() + *b.constant_value())) return *c;
  }
  if (is_value(a, 0.0)) return b;
  if (is_value(b, 0.0)) return a;
  return Expr::binary(BinaryOp::kAdd, std::move(a), std::move(b));
}

Expr fold_sub(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto c = fold_constant(*a.constant_value() - *b.constant_value())) return *c;
  }
  if (is_value(b, 0.0)) return a;
  if (is_value(a, 0.0)) return fold_unary(UnaryOp::kNeg, std::move(b));
  return Expr::binary(BinaryOp::kSub, std::move(a), std::move(b));
}

Expr fold_mul(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto c = fold_constant(*a.constant_value() * *b.constant_value())) return *c;
  }
  if (is_value(a, 0.0) || is_value(b, 0.0)) return Expr::constant(0.0);
  if (is_value(a, 1.0)) return b;
  if (is_value(b, 1.0)) return a;
  return Expr::binary(BinaryOp::kMul, std::move(a), std::move(b));
}

Expr fold_div(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant() && !is_value(b, 0.0)) {
    if (auto c = fold_constant(*a.constant_value() / *b.constant_value())) return *c;
  }
  if (is_value(a, 0.0)) return Expr::constant(0.0);
  if (is_value(b, 1.0)) return a;
  return Expr::binary(BinaryOp::kDiv, std::move(a), std::move(b));
}

Expr fold_pow(Expr base, double exponent) {
  if (exponent == 1.0) return base;
  if (exponent == 0.0) return Expr::constant(1.0);
  if (const auto c = base.constant_value()) {
    const auto v = try_apply([&] { return detail::apply_binary(BinaryOp::kPow, *c, exponent); });
    if (auto folded = fold_constant(v)) return *folded;
  }
  return Expr::binary(BinaryOp::kPow, std::move(base), Expr::constant(exponent));
}

Expr fold_unary(UnaryOp op, Expr operand) {
  if (const auto c = operand.constant_value()) {
    const auto v = try_apply([&] { return detail::apply_unary(op, *c); });
    if (auto folded = fold_constant(v)) return *folded;
  }
  if (op == UnaryOp::kNeg) {
    if (const auto* inner = std::get_if<UnaryNode>(&operand.node().data)) {
      if (inner->op == UnaryOp::kNeg) return inner->operand;
    }
  }
  return Expr::unary(op, std::move(operand));
}

// ---------------------------------------------------------------------------
// differentiation

Expr differentiate(const Expr& expr, std::string_view var) {
  return std::visit(
      Overloaded{
          [](const ConstantNode&) { return Expr::constant(0.0); },
          [&](const VariableNode& n) { return Expr::constant(n.name == var ? 1.0 : 0.0); },
          [&](const UnaryNode& n) {
            const Expr& u = n.operand;
            Expr du = differentiate(u, var);
            switch (n.op) {
              case UnaryOp::kNeg:
                return fold_unary(UnaryOp::kNeg, du);
              case UnaryOp::kSin:
                return fold_mul(fold_unary(UnaryOp::kCos, u), du);
              case UnaryOp::kCos:
                return fold_mul(fold_unary(UnaryOp::kNeg, fold_unary(UnaryOp::kSin, u)), du);
              case UnaryOp::kExp:
                return fold_mul(fold_unary(UnaryOp::kExp, u), du);
              case UnaryOp::kLog:
                return fold_div(du, u);
              case UnaryOp::kSqrt:
                return fold_div(du, fold_mul(Expr::constant(2.0), fold_unary(UnaryOp::kSqrt, u)));
            }
            return du;
          },
          [&](const BinaryNode& n) {
            const Expr& u = n.lhs;
            const Expr& v = n.rhs;
            switch (n.op) {
              case BinaryOp::kAdd:
                return fold_add(differentiate(u, var), differentiate(v, var));
              case BinaryOp::kSub:
                return fold_sub(differentiate(u, var), differentiate(v, var));
              case BinaryOp::kMul:
                return fold_add(fold_mul(differentiate(u, var), v),
                                fold_mul(u, differentiate(v, var)));
              case BinaryOp::kDiv:
                return fold_div(fold_sub(fold_mul(differentiate(u, var), v),
                                         fold_mul(u, differentiate(v, var))),
                                fold_pow(v, 2.0));
              case BinaryOp::kPow: {
                const double c = *v.constant_value();
                return fold_mul(fold_mul(Expr::constant(c), fold_pow(u, c - 1.0)),
                                differentiate(u, var));
              }
            }
            return Expr::constant(0.0);
          },
      },
      expr.node().data);
}

std::vector<double> gradient(const Expr& expr, std::span<const std::string> vars,
                             std::span<const double> point) {
  if (vars.size() != point.size()) {
    throw Error(ErrorKind::kDimension,
                fmt::format("gradient: {} variables but point has {} coordinates", vars.size(),
                            point.size()));
  }
  Binding binding;
  for (std::size_t i = 0; i < vars.size(); ++i) binding[vars[i]] = point[i];
  std::vector<double> result;
  result.reserve(vars.size());
  for (const auto& v : vars) result.push_back(evaluate(differentiate(expr, v), binding));
  return result;
}

// ---------------------------------------------------------------------------
// inspection

namespace {

void collect(const Expr& expr, std::set<std::string>& out) {
  std::visit(Overloaded{
                 [](const ConstantNode&) {},
                 [&](const VariableNode& n) { out.insert(n.name); },
                 [&](const UnaryNode& n) { collect(n.operand, out); },
                 [&](const BinaryNode& n) {
                   collect(n.lhs, out);
                   collect(n.rhs, out);
                 },
             },
             expr.node().data);
}

}  // namespace

std::set<std::string> variables_of(const Expr& expr) {
  std::set<std::string> out;
  collect(expr, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  const auto& x = a.node().data;
  const auto& y = b.node().data;
  if (x.index() != y.index()) return false;
  if (const auto* c = std::get_if<ConstantNode>(&x)) {
    return c->value == std::get<ConstantNode>(y).value;
  }
  if (const auto* v = std::get_if<VariableNode>(&x)) {
    return v->name == std::get<VariableNode>(y).name;
  }
  if (const auto* u = std::get_if<UnaryNode>(&x)) {
    const auto& w = std::get<UnaryNode>(y);
    return u->op == w.op && structurally_equal(u->operand, w.operand);
  }
  const auto& p = std::get<BinaryNode>(x);
  const auto& q = std::get<BinaryNode>(y);
  return p.op == q.op && structurally_equal(p.lhs, q.lhs) && structurally_equal(p.rhs, q.rhs);
}

// ---------------------------------------------------------------------------
// printing

namespace {

constexpr int kPrecSum = 1;
constexpr int kPrecProduct = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr& e) {
  const auto& d = e.node().data;
  if (const auto* u = std::get_if<UnaryNode>(&d)) {
    return u->op == UnaryOp::kNeg ? kPrecNeg : kPrecAtom;
  }
  if (const auto* b = std::get_if<BinaryNode>(&d)) {
    switch (b->op) {
      case BinaryOp::kAdd:
      case BinaryOp::kSub: return kPrecSum;
      case BinaryOp::kMul:
      case BinaryOp::kDiv: return kPrecProduct;
      case BinaryOp::kPow: return kPrecPow;
    }
  }
  return kPrecAtom;
}

const char* function_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::kSin: return "sin";
    case UnaryOp::kCos: return "cos";
    case UnaryOp::kExp: return "exp";
    case UnaryOp::kLog: return "log";
    case UnaryOp::kSqrt: return "sqrt";
    case UnaryOp::kNeg: break;
  }
  return "-";
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print_number(double value, std::string& out) {
  // Negative literals only survive a reparse when parenthesized.
  if (std::signbit(value)) {
    out += fmt::format("({:.17g})", value);
  } else {
    out += fmt::format("{:.17g}", value);
  }
}

void print(const Expr& e, std::string& out) {
  std::visit(Overloaded{
                 [&](const ConstantNode& n) { print_number(n.value, out); },
                 [&](const VariableNode& n) { out += n.name; },
                 [&](const UnaryNode& n) {
                   if (n.op != UnaryOp::kNeg) {
                     out += function_name(n.op);
                     print_wrapped(n.operand, true, out);
                     return;
                   }
                   out += '-';
                   const auto c = n.operand.constant_value();
                   const bool literal = c && !std::signbit(*c);
                   print_wrapped(n.operand, literal || precedence(n.operand) < kPrecNeg, out);
                 },
                 [&](const BinaryNode& n) {
                   if (n.op == BinaryOp::kPow) {
                     print_wrapped(n.lhs, precedence(n.lhs) <= kPrecPow, out);
                     out += '^';
                     print(n.rhs, out);
                     return;
                   }
                   const int p = precedence(e);
                   print_wrapped(n.lhs, precedence(n.lhs) < p, out);
                   switch (n.op) {
                     case BinaryOp::kAdd: out += " + "; break;
                     case BinaryOp::kSub: out += " - "; break;
                     case BinaryOp::kMul: out += '*'; break;
                     case BinaryOp::kDiv: out += '/'; break;
                     case BinaryOp::kPow: break;
                   }
                   const int rp = precedence(n.rhs);
                   print_wrapped(n.rhs, rp <= p || rp == kPrecNeg, out);
                 },
             },
             e.node().data);
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

}  // namespace kktscope
