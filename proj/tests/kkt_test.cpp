#include <doctest.h>

#include <vector>

#include "kktscope/errors.hpp"
#include "kktscope/kkt.hpp"
#include "kktscope/nnls.hpp"

using namespace kktscope;

namespace {

Problem scalar_problem(Sense sense, const char* objective, const char* constraint, Direction d,
                       double bound = 0.0) {
  Problem p;
  p.sense = sense;
  p.objectives = {parse_expression(objective)};
  p.constraints = {Constraint{parse_expression(constraint), d, bound}};
  p.variables = {"z"};
  p.domain = {{-10, 10}};
  return p;
}

}  // namespace

TEST_SUITE("nnls") {

TEST_CASE("unconstrained optimum is returned when nonnegative") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd b(3);
  b << 1, 2, 3;
  const NnlsResult r = solve_nnls(a, b);
  CHECK(r.x(0) == doctest::Approx(1.0));
  CHECK(r.x(1) == doctest::Approx(2.0));
  CHECK(r.residual_norm == doctest::Approx(0.0));
}

TEST_CASE("negative directions are clamped to exactly zero") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd b(2);
  b << -1, -1;
  const NnlsResult r = solve_nnls(a, b);
  CHECK(r.x(0) == 0.0);
  CHECK(r.x(1) == 0.0);
  CHECK(r.residual_norm == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("mixed case keeps only the useful column") {
  Eigen::MatrixXd a(2, 2);
  a << 1, -1, 0, 1;
  Eigen::VectorXd b(2);
  b << 2, -1;
  // The unconstrained solution (1, -1) is infeasible; best is x = (2, 0).
  const NnlsResult r = solve_nnls(a, b);
  CHECK(r.x(0) == doctest::Approx(2.0));
  CHECK(r.x(1) == 0.0);
  CHECK(r.residual_norm == doctest::Approx(1.0));
}

}  // TEST_SUITE

TEST_SUITE("kkt") {

TEST_CASE("case classification") {
  auto tag = [](Sense s, std::vector<Direction> dirs) {
    Problem p;
    p.sense = s;
    p.variables = {"z"};
    p.domain = {{0, 1}};
    p.objectives = {parse_expression("z")};
    for (const auto d : dirs) p.constraints.push_back({parse_expression("z"), d, 1.0});
    return classify_case(p);
  };
  CHECK(tag(Sense::kMaximize, {Direction::kGeqZero}) == CaseTag::kCase1);
  CHECK(tag(Sense::kMinimize, {Direction::kLeqBound, Direction::kLeqBound}) == CaseTag::kCase2);
  CHECK(tag(Sense::kMaximize, {Direction::kLeqBound}) == CaseTag::kCase3Max);
  CHECK(tag(Sense::kMinimize, {Direction::kGeqZero}) == CaseTag::kCase3Min);
  CHECK(tag(Sense::kMaximize, {Direction::kGeqZero, Direction::kLeqBound, Direction::kLeqBound}) ==
        CaseTag::kMixedMax);
  CHECK(tag(Sense::kMinimize, {Direction::kGeqZero, Direction::kLeqBound}) == CaseTag::kMixedMin);
}

TEST_CASE("validate") {
  Problem p = scalar_problem(Sense::kMaximize, "z", "z", Direction::kLeqBound, -1);
  CHECK(validate(p).size() == 1);  // W <= 0 is only a warning
  p.domain = {};
  CHECK_THROWS_AS(validate(p), SchemaError);
  p = scalar_problem(Sense::kMaximize, "w", "z", Direction::kGeqZero);
  CHECK_THROWS_AS(validate(p), SchemaError);
}

TEST_CASE("lagrangian sign conventions") {
  auto lag = [](Sense s, Direction d) {
    return build_lagrangian(scalar_problem(s, "z", "z", d, 5), 0).to_string();
  };
  CHECK(lag(Sense::kMaximize, Direction::kGeqZero) == "z - mu_1*(-z)");
  CHECK(lag(Sense::kMinimize, Direction::kLeqBound) == "z + mu_1*(z - 5)");
  CHECK(lag(Sense::kMaximize, Direction::kLeqBound) == "z - mu_1*(z - 5)");
  CHECK(lag(Sense::kMinimize, Direction::kGeqZero) == "z + mu_1*(-z)");

  Problem clash = scalar_problem(Sense::kMaximize, "mu_1", "mu_1", Direction::kGeqZero);
  clash.variables = {"mu_1"};
  CHECK_THROWS_AS(build_lagrangian(clash, 0), Error);
}

TEST_CASE("multiplier estimates") {
  const std::vector<double> at5{5.0};
  const auto c3 = estimate_multiplier(
      scalar_problem(Sense::kMaximize, "z", "z", Direction::kLeqBound, 5), 0, at5);
  CHECK(c3.mu[0] == 1.0);
  CHECK(c3.sign_class[0] == SignClass::kPositive);
  CHECK(c3.stationarity_residual == 0.0);
  CHECK(c3.closed_form);

  const std::vector<double> at0{0.0};
  const auto c1 = estimate_multiplier(scalar_problem(Sense::kMaximize, "z", "z", Direction::kGeqZero),
                                      0, at0);
  CHECK(c1.mu[0] == 0.0);
  CHECK(c1.sign_class[0] == SignClass::kForcedZero);

  Problem vec;
  vec.sense = Sense::kMaximize;
  vec.variables = {"z1", "z2"};
  vec.domain = {{0, 2}, {0, 2}};
  vec.objectives = {parse_expression("z1 + z2")};
  vec.constraints = {{parse_expression("z1"), Direction::kLeqBound, 1},
                     {parse_expression("z2"), Direction::kLeqBound, 1}};
  const std::vector<double> corner{1, 1};
  const auto v = estimate_multiplier(vec, 0, corner);
  CHECK(v.mu[0] == doctest::Approx(1.0));
  CHECK(v.mu[1] == doctest::Approx(1.0));
  CHECK(v.stationarity_residual == doctest::Approx(0.0));

  // Inactive constraints get mu = 0 regardless of gradients.
  const std::vector<double> inside{0.5, 0.5};
  const auto in = estimate_multiplier(vec, 0, inside);
  CHECK(in.mu == std::vector<double>{0.0, 0.0});
  CHECK(in.stationarity_residual == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("estimate_multiplier errors") {
  const std::vector<double> at0{0.0};
  CHECK_THROWS_AS(estimate_multiplier(
                      scalar_problem(Sense::kMaximize, "3", "z", Direction::kGeqZero), 0, at0),
                  Error);
  try {
    estimate_multiplier(scalar_problem(Sense::kMaximize, "z", "z^2", Direction::kGeqZero), 0, at0);
    FAIL("expected zero constraint gradient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kZeroConstraintGradient);
  }
  const std::vector<double> outside{11.0};
  CHECK_THROWS_AS(estimate_multiplier(
                      scalar_problem(Sense::kMaximize, "z", "z", Direction::kGeqZero), 0, outside),
                  Error);
}

TEST_CASE("sign table") {
  const auto pos = Sign::kPositive;
  const auto neg = Sign::kNegative;
  CHECK(classify_multiplier_sign(pos, neg, CaseTag::kCase1) == TableOutcome::kPositive);
  CHECK(classify_multiplier_sign(neg, neg, CaseTag::kCase3Max) == TableOutcome::kPositive);
  CHECK(classify_multiplier_sign(pos, pos, CaseTag::kCase1) == TableOutcome::kZero);
  CHECK_THROWS_AS(classify_multiplier_sign(pos, pos, CaseTag::kMixedMax), Error);
  const std::vector<double> g{1.0, -2.0};
  CHECK_FALSE(uniform_sign(g).has_value());
}

TEST_CASE("active set") {
  const Problem le = scalar_problem(Sense::kMaximize, "z", "z", Direction::kLeqBound, 5);
  CHECK(active_set(le, std::vector<double>{5.0}, 1e-6) == std::vector<std::size_t>{0});
  CHECK(active_set(le, std::vector<double>{3.0}, 1e-6).empty());
  const Problem ge = scalar_problem(Sense::kMaximize, "z", "z", Direction::kGeqZero);
  CHECK(active_set(ge, std::vector<double>{1e-9}, 1e-6) == std::vector<std::size_t>{0});
}

TEST_CASE("cone membership") {
  const std::vector<std::vector<double>> quadrant{{1, 0}, {0, 1}};
  CHECK(cone_membership(std::vector<double>{1, 1}, quadrant, 1e-6).verdict == ConeVerdict::kInside);
  CHECK(cone_membership(std::vector<double>{-1, -1}, quadrant, 1e-6).verdict ==
        ConeVerdict::kOutside);
  const auto r = cone_membership(std::vector<double>{1, -1}, {{1, 1}, {1, -2}}, 1e-6);
  CHECK(r.verdict == ConeVerdict::kInside);
  CHECK(r.coefficients[0] == doctest::Approx(1.0 / 3.0));
  CHECK(r.coefficients[1] == doctest::Approx(2.0 / 3.0));
  CHECK(cone_membership(std::vector<double>{0, 0}, {}, 1e-6).verdict == ConeVerdict::kInside);
  CHECK(cone_membership(std::vector<double>{1, 0}, {}, 1e-6).verdict == ConeVerdict::kOutside);
}

TEST_CASE("plot data") {
  Problem p;
  p.sense = Sense::kMaximize;
  p.variables = {"z1", "z2"};
  p.domain = {{0, 2}, {0, 2}};
  p.objectives = {parse_expression("z1 + z2")};
  p.constraints = {{parse_expression("z1"), Direction::kGeqZero, 0},
                   {parse_expression("z1 + z2"), Direction::kLeqBound, 2}};
  const std::vector<double> point{0, 2};
  const auto records = emit_cone_plot_data(p, point, 50);
  CHECK(records.size() == 2503);
  std::size_t arrows = 0;
  for (const auto& r : records) arrows += r.kind == "arrow";
  CHECK(arrows == 3);
  CHECK(records[2500].label == "O1:inside");
  CHECK(records[2501].dx1 == -1.0);  // z1 >= 0 written as -z1 <= 0

  p.variables.push_back("z3");
  p.domain.push_back({0, 1});
  CHECK_THROWS_AS(emit_cone_plot_data(p, std::vector<double>{0, 2, 0}, 10), Error);
}

TEST_CASE("analyze") {
  Problem mixed;
  mixed.sense = Sense::kMaximize;
  mixed.variables = {"z1", "z2", "z3"};
  mixed.domain = {{0, 6}, {0, 6}, {0, 6}};
  mixed.objectives = {parse_expression("z1 + 2*z2")};
  mixed.constraints = {{parse_expression("z3"), Direction::kGeqZero, 0},
                       {parse_expression("z1"), Direction::kLeqBound, 4},
                       {parse_expression("z2"), Direction::kLeqBound, 4}};
  const auto report = analyze(mixed, std::vector<double>{4, 4, 0}, 1e-6);
  CHECK(report.tag == CaseTag::kMixedMax);
  const auto& est = report.objectives[0].estimate;
  CHECK(est.sign_class[0] == SignClass::kForcedZero);
  CHECK(est.sign_class[1] == SignClass::kPositive);
  CHECK(est.sign_class[2] == SignClass::kPositive);
  CHECK(report.objectives[0].cone.verdict == ConeVerdict::kInside);

  const auto c1 = analyze(scalar_problem(Sense::kMaximize, "z + 1", "z", Direction::kGeqZero),
                          std::vector<double>{0.0}, 1e-6);
  CHECK(c1.objectives[0].estimate.sign_class[0] == SignClass::kForcedZero);
  CHECK(c1.objectives[0].cone.verdict == ConeVerdict::kOutside);
}

}  // TEST_SUITE
