#include <algorithm>
#include <array>
#include <cmath>

#include "kktscope/errors.hpp"
#include "kktscope/expr.hpp"

namespace kktscope {

CompiledExpr::CompiledExpr(const Expr& expr, std::span<const std::string> vars)
    : arity_(vars.size()) {
  emit(expr, vars, 1);
}

void CompiledExpr::emit(const Expr& expr, std::span<const std::string> vars, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  const auto& data = expr.node().data;
  if (const auto* c = std::get_if<ConstantNode>(&data)) {
    program_.push_back({Code::kConst, 0, 0, c->value});
  } else if (const auto* v = std::get_if<VariableNode>(&data)) {
    const auto it = std::find(vars.begin(), vars.end(), v->name);
    if (it == vars.end()) throw UnboundVariable(v->name);
    program_.push_back(
        {Code::kVar, 0, static_cast<std::size_t>(std::distance(vars.begin(), it)), 0.0});
  } else if (const auto* u = std::get_if<UnaryNode>(&data)) {
    emit(u->operand, vars, depth);
    program_.push_back({Code::kUnary, static_cast<unsigned char>(u->op), 0, 0.0});
  } else {
    const auto& b = std::get<BinaryNode>(data);
    emit(b.lhs, vars, depth);
    emit(b.rhs, vars, depth + 1);
    program_.push_back({Code::kBinary, static_cast<unsigned char>(b.op), 0, 0.0});
  }
}

double CompiledExpr::operator()(std::span<const double> point) const {
  if (point.size() != arity_) {
    throw Error(ErrorKind::kDimension, "compiled expression called with wrong point size");
  }
  constexpr std::size_t kInlineDepth = 64;
  std::array<double, kInlineDepth> inline_stack{};
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (max_depth_ > kInlineDepth) {
    heap_stack.resize(max_depth_);
    stack = heap_stack.data();
  }
  std::size_t top = 0;
  for (const Instr& ins : program_) {
    switch (ins.code) {
      case Code::kConst:
        stack[top++] = ins.value;
        break;
      case Code::kVar: {
        const double x = point[ins.index];
        if (!std::isfinite(x)) throw NumericDomainError("variable bound to non-finite value");
        stack[top++] = x;
        break;
      }
      case Code::kUnary:
        stack[top - 1] = detail::apply_unary(static_cast<UnaryOp>(ins.op), stack[top - 1]);
        break;
      case Code::kBinary:
        stack[top - 2] =
            detail::apply_binary(static_cast<BinaryOp>(ins.op), stack[top - 2], stack[top - 1]);
        --top;
        break;
    }
  }
  return stack[0];
}

}  // namespace kktscope
