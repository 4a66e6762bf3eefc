#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kktscope/expr.hpp"
#include "kktscope/kkt.hpp"

namespace kktscope {

/// n >= 2 objectives over a bounded box of resource variables (at most 3).
struct ScalarizationProblem {
  std::vector<Expr> objectives;
  std::vector<std::string> variables;
  std::vector<Interval> domain;
  bool expect_positive = true;
};

inline constexpr std::size_t kMaxResourceDims = 3;

void validate(const ScalarizationProblem& problem);

/// Weights beta_1..beta_{n-1} on the simplex; beta_n = 1 - sum is derived.
class WeightVector {
 public:
  /// Throws SimplexViolation unless every weight is in [0, 1] and the sum
  /// is at most 1 (1e-12 slack for lattice rounding).
  explicit WeightVector(std::vector<double> leading);

  std::span<const double> leading() const { return leading_; }
  double last() const;
  std::size_t objective_count() const { return leading_.size() + 1; }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> leading_;
};

/// E(beta, r) = sum_{x<n} beta_x O_x(r) + (1 - sum beta_x) O_n(r), computed as
/// O_n(r) + sum_{x<n} beta_x (O_x(r) - O_n(r)).
double cost(const ScalarizationProblem& problem, const WeightVector& beta,
            std::span<const double> r);

struct EStarSample {
  WeightVector beta;
  std::vector<double> r_star;
  double e_star = 0.0;
  double inner_residual = 0.0;
};

inline constexpr std::size_t kDefaultInnerGrid = 1024;
inline constexpr double kInnerStepTol = 1e-8;

/// Grid scan over grid^d points followed by golden-section refinement
/// around the best grid point. innerResidual is the final bracket width.
EStarSample inner_minimize(const ScalarizationProblem& problem, const WeightVector& beta,
                           std::size_t grid = kDefaultInnerGrid);

/// Every beta with coordinates k/resolution summing to at most 1, in
/// lexicographic order.
std::vector<WeightVector> simplex_lattice(std::size_t objective_count, std::size_t resolution);

std::size_t default_beta_grid(std::size_t objective_count);

struct EStarCurve {
  std::vector<EStarSample> samples;
};

EStarCurve sample_estar_curve(const ScalarizationProblem& problem, std::size_t beta_grid,
                              std::size_t inner_grid = kDefaultInnerGrid);

inline constexpr double kCurvatureTol = 1e-9;

struct CurvatureTrial {
  WeightVector beta;
  WeightVector beta_prime;
  double alpha = 0.0;
  double e_beta = 0.0;
  double e_beta_prime = 0.0;
  double e_mix = 0.0;
  // alpha E*(beta) + (1 - alpha) E*(beta') - E*(alpha beta + (1 - alpha) beta')
  double slack_paper = 0.0;
  double slack_reverse = 0.0;
};

struct CurvatureReport {
  std::vector<CurvatureTrial> trials;
  std::size_t paper_holds = 0;    // slack_paper >= -tol
  std::size_t reverse_holds = 0;  // slack_reverse >= -tol
  std::size_t both_hold = 0;      // |slack| <= tol
  double min_slack_paper = 0.0;
  double min_slack_reverse = 0.0;
};

/// Probes whether E* satisfies the convex-combination inequality
/// E*(mix) <= alpha E*(beta) + (1 - alpha) E*(beta') and its reverse.
CurvatureReport check_estar_curvature(const ScalarizationProblem& problem, std::size_t trials,
                                      std::uint64_t seed,
                                      std::size_t inner_grid = kDefaultInnerGrid);

/// dE*/dbeta_x = O_x(r*) - O_n(r*) with r* held fixed.
std::vector<double> envelope_derivative(const ScalarizationProblem& problem,
                                        const WeightVector& beta, const EStarSample& sample);

struct OuterResult {
  WeightVector beta;
  EStarSample sample;
  EStarSample lattice_best;
  std::size_t inner_solves = 0;
};

inline constexpr double kOuterStepFloor = 1e-6;

/// max over beta of min over r of E: lattice scan, then projected coordinate
/// ascent with steps halving from 1/beta_grid down to 1e-6.
OuterResult outer_maximize_beta(const ScalarizationProblem& problem, std::size_t beta_grid,
                                std::size_t inner_grid = kDefaultInnerGrid);

struct DegenerateReport {
  double e_star_at_one = 0.0;
  std::vector<double> r_star_at_one;
  bool r_star_independent = false;
  bool linear_in_beta = false;
  double max_r_drift = 0.0;
  double max_ratio_gap = 0.0;
  std::vector<EStarSample> samples;  // beta_1 = k / beta_grid, other weights zero
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kPremiseSamples = 1000;
inline constexpr double kPremiseZeroTol = 1e-12;
inline constexpr double kDegenerateRatioTol = 1e-8;
inline constexpr double kDegenerateDriftTol = 1e-6;

/// Single-objective limit: all objectives but the first vanish on the
/// domain. Throws PremiseViolation otherwise.
DegenerateReport degenerate_single_objective(const ScalarizationProblem& problem,
                                             std::size_t beta_grid, std::size_t inner_grid,
                                             std::uint64_t seed);

/// Uniform double in [0, 1) from a 64-bit engine output.
double unit_uniform(std::uint64_t bits);

}  // namespace kktscope
