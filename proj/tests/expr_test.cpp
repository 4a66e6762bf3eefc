#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "kktscope/errors.hpp"
#include "kktscope/expr.hpp"

using namespace kktscope;

namespace {

Expr num(double v) { return Expr::constant(v); }
Expr var(const char* n) { return Expr::variable(n); }
Expr bin(BinaryOp op, Expr a, Expr b) { return Expr::binary(op, std::move(a), std::move(b)); }

double eval1(const std::string& text, const char* name, double value) {
  return evaluate(parse_expression(text), Binding{{name, value}});
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("parse builds the expected tree") {
  const Expr a = parse_expression("z^2 + 3*z");
  const Expr want = bin(BinaryOp::kAdd, bin(BinaryOp::kPow, var("z"), num(2)),
                        bin(BinaryOp::kMul, num(3), var("z")));
  CHECK(structurally_equal(a, want));

  const Expr b = parse_expression("log(z1) - z2");
  CHECK(structurally_equal(
      b, bin(BinaryOp::kSub, Expr::unary(UnaryOp::kLog, var("z1")), var("z2"))));
}

TEST_CASE("precedence and associativity") {
  CHECK(eval1("2^3^2", "z", 0) == 512);
  CHECK(eval1("-z^2", "z", 3) == -9);
  CHECK(eval1("-2^2", "z", 0) == -4);
  CHECK(eval1("8/2/2", "z", 0) == 2);
  CHECK(eval1("10 - 4 - 3", "z", 0) == 3);
  CHECK(eval1("2*-z", "z", 3) == -6);
  CHECK(eval1("(1 + z)*(1 - z)", "z", 2) == -3);
  CHECK(eval1("1e-3*z", "z", 1000) == doctest::Approx(1.0));
}

TEST_CASE("syntax errors carry the offset") {
  try {
    parse_expression("2*+z");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 2);
    CHECK(e.kind() == ErrorKind::kSyntax);
  }
  CHECK_THROWS_AS(parse_expression(""), SyntaxError);
  CHECK_THROWS_AS(parse_expression("z +"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("(z"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("z)"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("tan(z)"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("1.2.3"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("z ^ z"), NonConstantExponent);
  CHECK_NOTHROW(parse_expression("z^(1/2)"));
}

TEST_CASE("evaluate") {
  CHECK(eval1("z^2+3*z", "z", 2) == 10);
  CHECK_THROWS_AS(eval1("log(z)", "z", 0), NumericDomainError);
  CHECK_THROWS_AS(eval1("sqrt(z)", "z", -1), NumericDomainError);
  CHECK(eval1("sqrt(z)", "z", 0) == 0);
  CHECK_THROWS_AS(eval1("1/z", "z", 0), NumericDomainError);
  CHECK_THROWS_AS(eval1("exp(z)", "z", 1000), NumericDomainError);
  try {
    evaluate(parse_expression("z1*z2"), Binding{{"z1", 3.0}});
    FAIL("expected an unbound variable");
  } catch (const UnboundVariable& e) {
    CHECK(e.name() == "z2");
  }
}

TEST_CASE("differentiate") {
  const Expr d = differentiate(parse_expression("z^2"), "z");
  CHECK(d.to_string() == "2*z");
  CHECK(evaluate(d, Binding{{"z", 3.0}}) == 6);
  CHECK(differentiate(parse_expression("z1*z2"), "z1").to_string() == "z2");
  CHECK(differentiate(parse_expression("log(z)"), "z").to_string() == "1/z");
  CHECK(differentiate(parse_expression("7"), "z").to_string() == "0");
  CHECK(eval1("0", "z", 0) == 0);

  const Expr q = differentiate(parse_expression("sin(z)/z"), "z");
  const double z = 1.3;
  CHECK(evaluate(q, Binding{{"z", z}}) ==
        doctest::Approx((std::cos(z) * z - std::sin(z)) / (z * z)).epsilon(1e-14));
}

TEST_CASE("gradient") {
  const std::vector<std::string> vars{"z1", "z2"};
  const std::vector<double> p{1, 2};
  CHECK(gradient(parse_expression("z1^2+z2^2"), vars, p) == std::vector<double>{2, 4});
  CHECK(gradient(parse_expression("5"), vars, p) == std::vector<double>{0, 0});
}

TEST_CASE("printer output reparses to the same tree") {
  const char* corpus[] = {
      "z^2 + 3*z",       "-(z + 1)",         "2*-z",          "(z1 - z2) - (z1 - z2)",
      "z1/(z2*z1)",      "(-2)^2",           "-2^2",          "(z^2)^3",
      "exp(-z)*sin(z)",  "z - -3",           "1/(1/z)",       "sqrt(z1^2 + z2^2)",
      "z^-1",            "-(-(z))",          "1e300*z",       "0.1 + 0.2",
      "z1*(z2/z1)^0.5",  "log(exp(z)) - z",  "-z*z",          "(-z)^2",
  };
  for (const char* text : corpus) {
    CAPTURE(text);
    const Expr e = parse_expression(text);
    const std::string printed = e.to_string();
    CAPTURE(printed);
    CHECK(structurally_equal(parse_expression(printed), e));
    const Expr d = differentiate(e, "z");
    CHECK(structurally_equal(parse_expression(d.to_string()), d));
  }
}

TEST_CASE("compiled form agrees with the tree walker") {
  const std::vector<std::string> vars{"z1", "z2"};
  const Expr e = parse_expression("sin(z1)*z2^3 - exp(z1/z2) + sqrt(z1 + z2)");
  const CompiledExpr f(e, vars);
  CHECK(f.arity() == 2);
  for (double a : {0.5, 1.0, 2.5}) {
    for (double b : {0.25, 1.5, 3.0}) {
      const std::vector<double> p{a, b};
      CHECK(f(p) == evaluate(e, Binding{{"z1", a}, {"z2", b}}));
    }
  }
  const CompiledExpr g(parse_expression("log(z1)"), vars);
  const std::vector<double> bad{0.0, 1.0};
  CHECK_THROWS_AS(g(bad), NumericDomainError);
  CHECK_THROWS_AS(CompiledExpr(parse_expression("w"), vars), UnboundVariable);
}

TEST_CASE("deep expressions use the heap stack") {
  std::string text = "z";
  for (int i = 0; i < 100; ++i) text = "(1 + " + text + ")";
  const std::vector<std::string> vars{"z"};
  const CompiledExpr f(parse_expression(text), vars);
  const std::vector<double> p{1.0};
  CHECK(f(p) == 101.0);

  std::string right = "z";
  for (int i = 0; i < 100; ++i) right = "z + (" + right + ")";
  const CompiledExpr g(parse_expression(right), vars);
  CHECK(g(p) == 101.0);
}

TEST_CASE("variables_of and identifiers") {
  const auto vars = variables_of(parse_expression("z1*z2 + sin(w)"));
  CHECK(vars == std::set<std::string>{"w", "z1", "z2"});
  CHECK(is_identifier("mu_1"));
  CHECK_FALSE(is_identifier("1z"));
}

}  // TEST_SUITE
