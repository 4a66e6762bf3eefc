#include "kktscope/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "kktscope/errors.hpp"
#include "kktscope/nnls.hpp"

namespace kktscope {
namespace {

Binding bind(const Problem& problem, std::span<const double> point) {
  Binding binding;
  for (std::size_t i = 0; i < problem.variables.size(); ++i) {
    binding[problem.variables[i]] = point[i];
  }
  return binding;
}

void check_point(const Problem& problem, std::span<const double> point) {
  if (point.size() != problem.variables.size()) {
    throw Error(ErrorKind::kDimension,
                fmt::format("point has {} coordinates but problem has {} variables", point.size(),
                            problem.variables.size()));
  }
  for (std::size_t i = 0; i < point.size(); ++i) {
    const Interval& box = problem.domain[i];
    if (!std::isfinite(point[i]) || point[i] < box.lower || point[i] > box.upper) {
      throw Error(ErrorKind::kInvalidArgument,
                  fmt::format("point coordinate {} = {} lies outside [{}, {}]",
                              problem.variables[i], point[i], box.lower, box.upper));
    }
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<std::string> validate(const Problem& problem) {
  if (problem.objectives.empty()) throw SchemaError("objectives", "at least one objective required");
  if (problem.constraints.empty()) {
    throw SchemaError("constraints", "at least one constraint required");
  }
  if (problem.variables.empty()) throw SchemaError("variables", "at least one variable required");
  if (problem.domain.size() != problem.variables.size()) {
    throw SchemaError("domain", "one interval per variable required");
  }
  std::set<std::string> declared;
  for (std::size_t i = 0; i < problem.variables.size(); ++i) {
    const auto& name = problem.variables[i];
    if (!is_identifier(name)) {
      throw SchemaError(fmt::format("variables[{}]", i), "invalid identifier '" + name + "'");
    }
    if (!declared.insert(name).second) {
      throw SchemaError(fmt::format("variables[{}]", i), "duplicate variable '" + name + "'");
    }
    const Interval& box = problem.domain[i];
    if (!std::isfinite(box.lower) || !std::isfinite(box.upper) || box.lower > box.upper) {
      throw SchemaError(fmt::format("domain[{}]", i), "interval must be finite with lower <= upper");
    }
  }
  auto check_refs = [&](const Expr& e, const std::string& field) {
    for (const auto& v : variables_of(e)) {
      if (!declared.count(v)) throw SchemaError(field, "undeclared variable '" + v + "'");
    }
  };
  for (std::size_t x = 0; x < problem.objectives.size(); ++x) {
    check_refs(problem.objectives[x], fmt::format("objectives[{}]", x));
  }
  std::vector<std::string> warnings;
  for (std::size_t y = 0; y < problem.constraints.size(); ++y) {
    const Constraint& c = problem.constraints[y];
    check_refs(c.body, fmt::format("constraints[{}].expr", y));
    if (c.direction == Direction::kLeqBound) {
      if (!std::isfinite(c.bound)) {
        throw SchemaError(fmt::format("constraints[{}].bound", y), "bound must be finite");
      }
      if (c.bound <= 0.0) {
        warnings.push_back(
            fmt::format("constraint {}: upper bound W = {} is not positive", y + 1, c.bound));
      }
    }
  }
  return warnings;
}

std::string_view to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::kCase1: return "Case1";
    case CaseTag::kCase2: return "Case2";
    case CaseTag::kCase3Max: return "Case3Max";
    case CaseTag::kCase3Min: return "Case3Min";
    case CaseTag::kMixedMax: return "MixedMax";
    case CaseTag::kMixedMin: return "MixedMin";
  }
  return "?";
}

std::string_view to_string(Sense sense) {
  return sense == Sense::kMaximize ? "maximize" : "minimize";
}

std::string_view to_string(SignClass c) {
  return c == SignClass::kPositive ? "positive" : "forced_zero";
}

std::string_view to_string(Sign s) { return s == Sign::kPositive ? "pos" : "neg"; }

std::string_view to_string(TableOutcome t) {
  return t == TableOutcome::kPositive ? "positive" : "zero";
}

std::string_view to_string(ConeVerdict v) {
  return v == ConeVerdict::kInside ? "inside" : "outside";
}

CaseTag classify_case(const Problem& problem) {
  const bool any_geq = std::any_of(problem.constraints.begin(), problem.constraints.end(),
                                   [](const Constraint& c) { return c.direction == Direction::kGeqZero; });
  const bool any_leq = std::any_of(problem.constraints.begin(), problem.constraints.end(),
                                   [](const Constraint& c) { return c.direction == Direction::kLeqBound; });
  const bool maximize = problem.sense == Sense::kMaximize;
  if (any_geq && any_leq) return maximize ? CaseTag::kMixedMax : CaseTag::kMixedMin;
  if (maximize) return any_leq ? CaseTag::kCase3Max : CaseTag::kCase1;
  return any_leq ? CaseTag::kCase2 : CaseTag::kCase3Min;
}

CaseTag pure_case(Sense sense, Direction direction) {
  if (sense == Sense::kMaximize) {
    return direction == Direction::kGeqZero ? CaseTag::kCase1 : CaseTag::kCase3Max;
  }
  return direction == Direction::kLeqBound ? CaseTag::kCase2 : CaseTag::kCase3Min;
}

double stationarity_sign(Sense sense, Direction direction) {
  // maximize: grad O = sum mu grad g; minimize: grad O = -sum mu grad g,
  // with grad g = grad C for upper bounds and -grad C for C >= 0.
  const double g_sign = direction == Direction::kLeqBound ? 1.0 : -1.0;
  return sense == Sense::kMaximize ? g_sign : -g_sign;
}

std::string multiplier_name(std::size_t constraint_index) {
  return fmt::format("mu_{}", constraint_index + 1);
}

Expr build_lagrangian(const Problem& problem, std::size_t objective) {
  if (objective >= problem.objectives.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("objective index {} out of range", objective + 1));
  }
  for (std::size_t y = 0; y < problem.constraints.size(); ++y) {
    const std::string name = multiplier_name(y);
    if (std::find(problem.variables.begin(), problem.variables.end(), name) !=
        problem.variables.end()) {
      throw Error(ErrorKind::kVariableNameClash,
                  "problem variable '" + name + "' clashes with a multiplier name");
    }
  }
  const BinaryOp combine =
      problem.sense == Sense::kMaximize ? BinaryOp::kSub : BinaryOp::kAdd;
  Expr lagrangian = problem.objectives[objective];
  for (std::size_t y = 0; y < problem.constraints.size(); ++y) {
    const Constraint& c = problem.constraints[y];
    Expr g = c.direction == Direction::kLeqBound
                 ? Expr::binary(BinaryOp::kSub, c.body, Expr::constant(c.bound))
                 : Expr::unary(UnaryOp::kNeg, c.body);
    Expr term = Expr::binary(BinaryOp::kMul, Expr::variable(multiplier_name(y)), g);
    lagrangian = Expr::binary(combine, lagrangian, term);
  }
  return lagrangian;
}

std::vector<double> normalized_constraint_gradient(const Problem& problem, std::size_t y,
                                                   std::span<const double> point) {
  std::vector<double> g = gradient(problem.constraints[y].body, problem.variables, point);
  if (problem.constraints[y].direction == Direction::kGeqZero) {
    for (double& v : g) v = -v;
  }
  return g;
}

std::vector<std::size_t> active_set(const Problem& problem, std::span<const double> point,
                                    double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::kInvalidArgument, "active-set tolerance must be > 0");
  if (point.size() != problem.variables.size()) {
    throw Error(ErrorKind::kDimension, "point dimension does not match variables");
  }
  const Binding binding = bind(problem, point);
  std::vector<std::size_t> active;
  for (std::size_t y = 0; y < problem.constraints.size(); ++y) {
    const Constraint& c = problem.constraints[y];
    const double value = evaluate(c.body, binding);
    const double gap = c.direction == Direction::kLeqBound ? value - c.bound : value;
    if (std::abs(gap) <= tol) active.push_back(y);
  }
  return active;
}

std::optional<Sign> uniform_sign(std::span<const double> g) {
  if (g.empty()) return std::nullopt;
  if (std::all_of(g.begin(), g.end(), [](double v) { return v > kGradientZeroTol; })) {
    return Sign::kPositive;
  }
  if (std::all_of(g.begin(), g.end(), [](double v) { return v < -kGradientZeroTol; })) {
    return Sign::kNegative;
  }
  return std::nullopt;
}

TableOutcome classify_multiplier_sign(Sign grad_objective, Sign grad_constraint, CaseTag tag) {
  const bool agree = grad_objective == grad_constraint;
  switch (tag) {
    case CaseTag::kCase1:
    case CaseTag::kCase2:
      return agree ? TableOutcome::kZero : TableOutcome::kPositive;
    case CaseTag::kCase3Max:
    case CaseTag::kCase3Min:
      return agree ? TableOutcome::kPositive : TableOutcome::kZero;
    case CaseTag::kMixedMax:
    case CaseTag::kMixedMin:
      break;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "sign classification needs a pure case; classify mixed problems per constraint");
}

MultiplierEstimate estimate_multiplier(const Problem& problem, std::size_t objective,
                                       std::span<const double> point, double active_tol) {
  if (objective >= problem.objectives.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("objective index {} out of range", objective + 1));
  }
  check_point(problem, point);
  const std::size_t n = problem.constraints.size();

  MultiplierEstimate est;
  est.objective = objective;
  est.mu.assign(n, 0.0);
  est.sign_class.assign(n, SignClass::kForcedZero);
  est.active.assign(n, false);

  const std::vector<double> grad_o = gradient(problem.objectives[objective], problem.variables, point);
  if (max_abs(grad_o) <= kGradientZeroTol) {
    throw Error(ErrorKind::kZeroObjectiveGradient,
                fmt::format("objective {} has zero gradient at the query point", objective + 1));
  }

  const std::vector<std::size_t> active = active_set(problem, point, active_tol);
  std::vector<std::vector<double>> generators;
  for (const std::size_t y : active) {
    est.active[y] = true;
    std::vector<double> g = gradient(problem.constraints[y].body, problem.variables, point);
    if (max_abs(g) <= kGradientZeroTol) {
      throw Error(ErrorKind::kZeroConstraintGradient,
                  fmt::format("constraint {} is active with zero gradient; multiplier undefined",
                              y + 1));
    }
    const double s = stationarity_sign(problem.sense, problem.constraints[y].direction);
    for (double& v : g) v *= s;
    generators.push_back(std::move(g));
  }

  if (active.empty()) {
    est.stationarity_residual = norm2(grad_o);
    return est;
  }

  if (problem.variables.size() == 1 && active.size() == 1) {
    const std::size_t y = active.front();
    const double ratio = grad_o[0] / generators[0][0];
    est.closed_form = true;
    if (ratio > 0.0) {
      est.mu[y] = ratio;
      est.sign_class[y] = SignClass::kPositive;
      est.stationarity_residual = std::abs(grad_o[0] - ratio * generators[0][0]);
    } else {
      est.stationarity_residual = std::abs(grad_o[0]);
    }
    return est;
  }

  const ConeResult cone = cone_membership(grad_o, generators, 1.0);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t y = active[k];
    est.mu[y] = cone.coefficients[k];
    if (est.mu[y] > 0.0) est.sign_class[y] = SignClass::kPositive;
  }
  est.stationarity_residual = cone.residual;
  return est;
}

ConeResult cone_membership(std::span<const double> grad_objective,
                           const std::vector<std::vector<double>>& generators, double tol) {
  const auto dim = static_cast<Eigen::Index>(grad_objective.size());
  Eigen::VectorXd b(dim);
  for (Eigen::Index i = 0; i < dim; ++i) b(i) = grad_objective[i];

  ConeResult result;
  if (generators.empty()) {
    result.residual = b.norm();
  } else {
    Eigen::MatrixXd a(dim, static_cast<Eigen::Index>(generators.size()));
    for (std::size_t k = 0; k < generators.size(); ++k) {
      if (generators[k].size() != grad_objective.size()) {
        throw Error(ErrorKind::kDimension, "cone generator dimension mismatch");
      }
      for (Eigen::Index i = 0; i < dim; ++i) a(i, static_cast<Eigen::Index>(k)) = generators[k][i];
    }
    const NnlsResult nnls = solve_nnls(a, b);
    result.coefficients.assign(nnls.x.data(), nnls.x.data() + nnls.x.size());
    result.residual = (b - a * nnls.x).norm();
  }
  result.verdict = result.residual <= tol * (1.0 + b.norm()) ? ConeVerdict::kInside
                                                             : ConeVerdict::kOutside;
  return result;
}

AnalysisReport analyze(const Problem& problem, std::span<const double> point, double tol) {
  AnalysisReport report;
  report.warnings = validate(problem);
  check_point(problem, point);
  report.tag = classify_case(problem);
  report.point.assign(point.begin(), point.end());
  report.tol = tol;
  report.active = active_set(problem, point, tol);
  const Binding binding = bind(problem, point);

  for (std::size_t x = 0; x < problem.objectives.size(); ++x) {
    ObjectiveReport obj;
    obj.objective = x;
    try {
      obj.value = evaluate(problem.objectives[x], binding);
      obj.gradient = gradient(problem.objectives[x], problem.variables, point);
      obj.estimate = estimate_multiplier(problem, x, point, tol);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("objective {}: {}", x + 1, e.what()));
    }
    if (obj.value <= 0.0) {
      report.warnings.push_back(
          fmt::format("objective {} is not positive at the query point ({})", x + 1, obj.value));
    }

    std::vector<std::vector<double>> generators;
    for (const std::size_t y : report.active) {
      std::vector<double> g = gradient(problem.constraints[y].body, problem.variables, point);
      const double s = stationarity_sign(problem.sense, problem.constraints[y].direction);
      for (double& v : g) v *= s;
      generators.push_back(std::move(g));
    }
    obj.cone = cone_membership(obj.gradient, generators, tol);

    const auto objective_sign = uniform_sign(obj.gradient);
    for (std::size_t y = 0; y < problem.constraints.size(); ++y) {
      const Constraint& c = problem.constraints[y];
      ConstraintReport cr;
      cr.index = y;
      cr.pure_case = pure_case(problem.sense, c.direction);
      try {
        cr.value = evaluate(c.body, binding);
        cr.gradient = gradient(c.body, problem.variables, point);
      } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("constraint {}: {}", y + 1, e.what()));
      }
      cr.active = obj.estimate.active[y];
      cr.objective_sign = objective_sign;
      cr.constraint_sign = uniform_sign(cr.gradient);
      if (cr.objective_sign && cr.constraint_sign) {
        cr.table = classify_multiplier_sign(*cr.objective_sign, *cr.constraint_sign, cr.pure_case);
      }
      obj.constraints.push_back(std::move(cr));
    }
    report.objectives.push_back(std::move(obj));
  }
  return report;
}

}  // namespace kktscope
