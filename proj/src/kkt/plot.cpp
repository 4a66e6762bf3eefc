#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "kktscope/errors.hpp"
#include "kktscope/kkt.hpp"

namespace kktscope {
namespace {

double lattice(const Interval& box, std::size_t i, std::size_t grid) {
  if (grid == 1) return 0.5 * (box.lower + box.upper);
  return box.lower + (box.upper - box.lower) * static_cast<double>(i) / static_cast<double>(grid - 1);
}

}  // namespace

std::vector<PlotRecord> emit_cone_plot_data(const Problem& problem, std::span<const double> point,
                                            std::size_t grid, double tol) {
  if (problem.variables.size() != 2) {
    throw Error(ErrorKind::kDimension,
                fmt::format("plot data needs exactly 2 variables, problem has {}",
                            problem.variables.size()));
  }
  if (grid == 0) throw Error(ErrorKind::kInvalidArgument, "plot grid must be positive");

  std::vector<CompiledExpr> bodies;
  for (const auto& c : problem.constraints) bodies.emplace_back(c.body, problem.variables);
  const CompiledExpr objective(problem.objectives.front(), problem.variables);
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  std::vector<PlotRecord> records;
  records.reserve(grid * grid + problem.objectives.size() + problem.constraints.size());
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const std::array<double, 2> z{lattice(problem.domain[0], i, grid),
                                    lattice(problem.domain[1], j, grid)};
      PlotRecord rec{"level", z[0], z[1], kNaN, kNaN, "undefined"};
      try {
        double slack = std::numeric_limits<double>::infinity();
        std::size_t which = 0;
        for (std::size_t y = 0; y < bodies.size(); ++y) {
          const double v = bodies[y](z);
          const Constraint& c = problem.constraints[y];
          const double s = c.direction == Direction::kLeqBound ? c.bound - v : v;
          if (s < slack) {
            slack = s;
            which = y;
          }
        }
        rec.dx1 = slack;
        rec.dx2 = objective(z);
        rec.label = fmt::format("C{}", which + 1);
      } catch (const NumericDomainError&) {
        // left as undefined
      }
      records.push_back(std::move(rec));
    }
  }

  const AnalysisReport report = analyze(problem, point, tol);
  for (const ObjectiveReport& obj : report.objectives) {
    records.push_back({"arrow", point[0], point[1], obj.gradient[0], obj.gradient[1],
                       fmt::format("O{}:{}", obj.objective + 1, to_string(obj.cone.verdict))});
  }
  for (std::size_t y = 0; y < problem.constraints.size(); ++y) {
    const std::vector<double> g = normalized_constraint_gradient(problem, y, point);
    const bool active = report.objectives.front().constraints[y].active;
    records.push_back({"arrow", point[0], point[1], g[0], g[1],
                       fmt::format("C{}:{}", y + 1, active ? "active" : "inactive")});
  }
  return records;
}

}  // namespace kktscope
