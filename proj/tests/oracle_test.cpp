#include <doctest.h>

#include <cmath>
#include <vector>

#include "kktscope/oracle.hpp"

using namespace kktscope;
using namespace kktscope::oracle;

namespace {

OracleConfig grid(std::size_t points) {
  OracleConfig c;
  c.grid_points = points;
  return c;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("brute_force_min") {
  const std::vector<std::string> r{"r"};
  const std::vector<Interval> box{{0, 5}};
  const auto q = brute_force_min(parse_expression("(r - 2)^2"), r, box, grid(501));
  CHECK(q.argmin[0] == 2.0);
  CHECK(q.value == 0.0);
  const auto lin = brute_force_min(parse_expression("r"), r, box, grid(501));
  CHECK(lin.argmin[0] == 0.0);
  const auto flat = brute_force_min(parse_expression("7"), r, box, grid(501));
  CHECK(flat.argmin[0] == 0.0);
  CHECK(flat.value == 7.0);
}

TEST_CASE("grid refinement never raises the minimum") {
  const std::vector<std::string> r{"r"};
  const std::vector<Interval> box{{0, 5}};
  const Expr f = parse_expression("sin(3*r) + 0.1*(r - 2.2)^2");
  // Doubling the spacing count keeps every old lattice point.
  for (std::size_t g = 11; g < 2000; g = 2 * g - 1) {
    const double coarse = brute_force_min(f, r, box, grid(g)).value;
    const double fine = brute_force_min(f, r, box, grid(2 * g - 1)).value;
    CHECK(fine <= coarse + 1e-12);
  }
}

TEST_CASE("brute_force_saddle") {
  ScalarizationProblem p;
  p.variables = {"r"};
  p.domain = {{0, 5}};
  p.objectives = {parse_expression("(r - 1)^2 + 1"), parse_expression("(r - 3)^2 + 2")};
  const auto s = brute_force_saddle(p, grid(1001));
  // One lattice step: the r grid's rounding outweighs E*(0.376) - E*(0.375) = -4e-6.
  CHECK(std::abs(s.beta[0] - 0.375) <= 1e-3 + 1e-12);
  CHECK(std::abs(s.value - 2.5625) <= 1e-5);

  p.objectives = {parse_expression("(r - 2)^2 + 1"), parse_expression("0")};
  CHECK(brute_force_saddle(p, grid(101)).beta[0] == 1.0);

  p.objectives = {parse_expression("(r - 2)^2 + 1"), parse_expression("(r - 2)^2 + 1")};
  const auto same = brute_force_saddle(p, grid(101));
  CHECK(same.beta[0] == 0.0);
  CHECK(std::abs(same.value - 1.0) <= 1e-12);
}

TEST_CASE("finite differences") {
  const std::vector<std::string> z{"z"};
  CHECK(std::abs(finite_difference_gradient(parse_expression("z^2"), z, std::vector<double>{3}, 1e-5)[0] -
                 6.0) <= 1e-8);
  CHECK(std::abs(finite_difference_gradient(parse_expression("4"), z, std::vector<double>{3}, 1e-5)[0]) <=
        1e-12);
  const std::vector<std::string> zz{"z1", "z2"};
  const auto g = finite_difference_gradient(parse_expression("z1*z2"), zz, std::vector<double>{3, 4}, 1e-5);
  CHECK(std::abs(g[0] - 4) <= 1e-8);
  CHECK(std::abs(g[1] - 3) <= 1e-8);
}

TEST_CASE("mu grid") {
  const std::vector<std::vector<double>> quadrant{{1, 0}, {0, 1}};
  CHECK(mu_grid_feasibility(std::vector<double>{1, 1}, quadrant));
  CHECK_FALSE(mu_grid_feasibility(std::vector<double>{-1, -1}, quadrant));
  CHECK(mu_grid_feasibility(std::vector<double>{2, 4}, {{1, 2}}));
  CHECK_FALSE(mu_grid_feasibility(std::vector<double>{20, 0}, {{1, 0}}));  // beyond mu_max
  CHECK(mu_grid_feasibility(std::vector<double>{0.5, 0.5}, {{1, 0}, {0, 1}, {1, 1}}));
}

}  // TEST_SUITE
