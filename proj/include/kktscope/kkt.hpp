#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kktscope/expr.hpp"

namespace kktscope {

enum class Sense { kMaximize, kMinimize };

enum class Direction {
  kGeqZero,   // C(z) >= 0
  kLeqBound,  // C(z) <= W
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct Constraint {
  Expr body;
  Direction direction = Direction::kGeqZero;
  double bound = 0.0;  // W, only meaningful for kLeqBound
};

/// A nonlinear program analyzed at a caller-supplied point.
struct Problem {
  Sense sense = Sense::kMaximize;
  std::vector<Expr> objectives;
  std::vector<Constraint> constraints;
  std::vector<std::string> variables;
  std::vector<Interval> domain;
};

/// Checks the structural invariants and throws on violation. Returns
/// warnings for soft premises (nonpositive bounds).
std::vector<std::string> validate(const Problem& problem);

enum class CaseTag { kCase1, kCase2, kCase3Max, kCase3Min, kMixedMax, kMixedMin };

std::string_view to_string(CaseTag tag);
std::string_view to_string(Sense sense);

CaseTag classify_case(const Problem& problem);

/// The pure case a single (sense, direction) pair belongs to.
CaseTag pure_case(Sense sense, Direction direction);

/// Sign s with which a constraint gradient enters the stationarity
/// condition grad O = sum_y mu_y * s * grad C_y.
double stationarity_sign(Sense sense, Direction direction);

std::string multiplier_name(std::size_t constraint_index);

/// Lagrangian of objective `objective` (0-based) with multipliers named
/// mu_1..mu_n. Maximize: O - sum mu_y g_y. Minimize: O + sum mu_y g_y, where
/// g_y = C_y - W_y for upper bounds and g_y = -C_y for C_y >= 0.
Expr build_lagrangian(const Problem& problem, std::size_t objective);

/// Gradient of the constraint written in `g(z) <= 0` form.
std::vector<double> normalized_constraint_gradient(const Problem& problem, std::size_t y,
                                                   std::span<const double> point);

std::vector<std::size_t> active_set(const Problem& problem, std::span<const double> point,
                                    double tol);

enum class SignClass { kPositive, kForcedZero };
std::string_view to_string(SignClass c);

struct MultiplierEstimate {
  std::size_t objective = 0;
  std::vector<double> mu;
  std::vector<SignClass> sign_class;
  std::vector<bool> active;
  double stationarity_residual = 0.0;
  bool closed_form = false;  // scalar ratio rather than nonnegative least squares
};

inline constexpr double kGradientZeroTol = 1e-9;

MultiplierEstimate estimate_multiplier(const Problem& problem, std::size_t objective,
                                       std::span<const double> point, double active_tol = 1e-6);

enum class Sign { kPositive, kNegative };
std::string_view to_string(Sign s);

enum class TableOutcome { kPositive, kZero };
std::string_view to_string(TableOutcome t);

/// Multiplier sign rule for the pure cases: cases 1 and 2 give a positive
/// multiplier iff the gradients disagree in sign, case 3 iff they agree.
/// Throws for mixed tags.
TableOutcome classify_multiplier_sign(Sign grad_objective, Sign grad_constraint, CaseTag tag);

/// Strict componentwise sign of a gradient, if it has one.
std::optional<Sign> uniform_sign(std::span<const double> g);

enum class ConeVerdict { kInside, kOutside };
std::string_view to_string(ConeVerdict v);

struct ConeResult {
  ConeVerdict verdict = ConeVerdict::kOutside;
  std::vector<double> coefficients;
  double residual = 0.0;
};

ConeResult cone_membership(std::span<const double> grad_objective,
                           const std::vector<std::vector<double>>& generators, double tol);

struct ConstraintReport {
  std::size_t index = 0;
  CaseTag pure_case = CaseTag::kCase1;
  double value = 0.0;
  bool active = false;
  std::vector<double> gradient;
  std::optional<Sign> objective_sign;
  std::optional<Sign> constraint_sign;
  std::optional<TableOutcome> table;
};

struct ObjectiveReport {
  std::size_t objective = 0;
  double value = 0.0;
  std::vector<double> gradient;
  MultiplierEstimate estimate;
  ConeResult cone;
  std::vector<ConstraintReport> constraints;
};

struct AnalysisReport {
  CaseTag tag = CaseTag::kCase1;
  std::vector<double> point;
  double tol = 0.0;
  std::vector<std::size_t> active;
  std::vector<ObjectiveReport> objectives;
  std::vector<std::string> warnings;
};

AnalysisReport analyze(const Problem& problem, std::span<const double> point, double tol);

struct PlotRecord {
  std::string kind;
  double x1 = 0.0;
  double x2 = 0.0;
  double dx1 = 0.0;
  double dx2 = 0.0;
  std::string label;
};

/// Planar plot data: `grid`^2 level records in row-major order (x1 major),
/// then one arrow per objective and one per constraint.
///
/// Level records carry dx1 = smallest constraint slack (>= 0 is feasible,
/// its zero contour traces the constraint boundaries), dx2 = first objective
/// value, label = 1-based index of the constraint attaining that slack.
/// Arrow records sit at the query point; objective arrows carry the gradient
/// and the cone verdict, constraint arrows the gradient of g(z) <= 0.
std::vector<PlotRecord> emit_cone_plot_data(const Problem& problem, std::span<const double> point,
                                            std::size_t grid, double tol = 1e-6);

}  // namespace kktscope
