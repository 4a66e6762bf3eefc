#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kktscope/expr.hpp"
#include "kktscope/kkt.hpp"
#include "kktscope/scalarize.hpp"

// Brute-force reference implementations. Pure grids without refinement, kept
// deliberately separate from the solvers they check.
namespace kktscope::oracle {

struct OracleConfig {
  std::size_t grid_points = 1001;
  std::uint64_t seed = 0;
  double h = 1e-5;

  void validate() const;
};

struct MinResult {
  std::vector<double> argmin;
  double value = 0.0;
};

/// Exhaustive regular-grid scan; ties go to the lexicographically smallest point.
MinResult brute_force_min(const Expr& f, std::span<const std::string> vars,
                          std::span<const Interval> box, const OracleConfig& config);

/// Values of the grid local minima of a 1-D function, ascending.
std::vector<double> grid_local_minima(const Expr& f, const std::string& var, const Interval& box,
                                      const OracleConfig& config);

struct SaddleResult {
  std::vector<double> beta;
  std::vector<double> r_star;
  double value = 0.0;
};

/// max over a beta grid of min over an r grid of the weighted cost, with
/// grid_points samples per axis. n in {2, 3}; r dimension at most 2.
SaddleResult brute_force_saddle(const ScalarizationProblem& problem, const OracleConfig& config);

std::vector<double> finite_difference_gradient(const Expr& f, std::span<const std::string> vars,
                                               std::span<const double> point, double h);

inline constexpr double kMuGridResidualTol = 1e-4;

/// True iff some mu on the lattice {0, step, ..., mu_max}^k reaches
/// ||grad - sum mu_y v_y|| <= 1e-4 (1 + ||grad||). The last coordinate is
/// scanned in closed form: the residual is a convex quadratic in it, so the
/// best lattice value is a neighbor of the continuous minimizer.
bool mu_grid_feasibility(std::span<const double> grad_objective,
                         const std::vector<std::vector<double>>& generators, double mu_max = 10.0,
                         double step = 1e-2);

}  // namespace kktscope::oracle
