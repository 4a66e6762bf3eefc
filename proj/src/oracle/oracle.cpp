#include "kktscope/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "kktscope/errors.hpp"

namespace kktscope::oracle {
namespace {

double axis(const Interval& box, std::size_t i, std::size_t grid) {
  return box.lower + (box.upper - box.lower) * static_cast<double>(i) / static_cast<double>(grid - 1);
}

// Calls visit(point) for every grid point in row-major order.
template <class Visit>
void for_each_grid_point(std::span<const Interval> box, std::size_t grid, Visit&& visit) {
  const std::size_t dims = box.size();
  std::vector<std::size_t> index(dims, 0);
  std::vector<double> point(dims);
  for (;;) {
    for (std::size_t k = 0; k < dims; ++k) point[k] = axis(box[k], index[k], grid);
    visit(std::span<const double>(point));
    std::size_t k = dims;
    for (;;) {
      if (k == 0) return;
      --k;
      if (++index[k] < grid) break;
      index[k] = 0;
    }
  }
}

}  // namespace

void OracleConfig::validate() const {
  if (grid_points < 2) throw Error(ErrorKind::kInvalidArgument, "oracle grid needs >= 2 points");
  if (!(h > 0.0)) throw Error(ErrorKind::kInvalidArgument, "finite-difference step must be > 0");
}

MinResult brute_force_min(const Expr& f, std::span<const std::string> vars,
                          std::span<const Interval> box, const OracleConfig& config) {
  config.validate();
  if (vars.size() != box.size() || vars.empty() || vars.size() > 3) {
    throw Error(ErrorKind::kDimension, "brute_force_min supports 1 to 3 dimensions");
  }
  const CompiledExpr fn(f, vars);
  MinResult best{{}, std::numeric_limits<double>::infinity()};
  for_each_grid_point(box, config.grid_points, [&](std::span<const double> p) {
    const double v = fn(p);
    if (v < best.value) {
      best.value = v;
      best.argmin.assign(p.begin(), p.end());
    }
  });
  return best;
}

std::vector<double> grid_local_minima(const Expr& f, const std::string& var, const Interval& box,
                                      const OracleConfig& config) {
  config.validate();
  const std::vector<std::string> vars{var};
  const CompiledExpr fn(f, vars);
  const std::size_t g = config.grid_points;
  std::vector<double> values(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double r = axis(box, i, g);
    values[i] = fn(std::span<const double>(&r, 1));
  }
  std::vector<double> minima;
  for (std::size_t i = 0; i < g; ++i) {
    const bool left_ok = i == 0 || values[i] <= values[i - 1];
    const bool right_ok = i + 1 == g || values[i] <= values[i + 1];
    if (left_ok && right_ok) minima.push_back(values[i]);
  }
  std::sort(minima.begin(), minima.end());
  return minima;
}

SaddleResult brute_force_saddle(const ScalarizationProblem& problem, const OracleConfig& config) {
  config.validate();
  const std::size_t n = problem.objectives.size();
  const std::size_t dims = problem.variables.size();
  if (n < 2 || n > 3) throw Error(ErrorKind::kDimension, "brute_force_saddle needs 2 or 3 objectives");
  if (dims < 1 || dims > 2) throw Error(ErrorKind::kDimension, "brute_force_saddle needs r dimension <= 2");
  const std::size_t g = config.grid_points;

  // Tabulate every objective on the r grid once.
  std::vector<CompiledExpr> fns;
  for (const auto& o : problem.objectives) fns.emplace_back(o, problem.variables);
  std::vector<std::vector<double>> points;
  std::vector<std::vector<double>> table(n);
  for_each_grid_point(problem.domain, g, [&](std::span<const double> p) {
    points.emplace_back(p.begin(), p.end());
    for (std::size_t x = 0; x < n; ++x) table[x].push_back(fns[x](p));
  });

  SaddleResult best{{}, {}, -std::numeric_limits<double>::infinity()};
  auto consider = [&](const std::vector<double>& beta) {
    double weight_sum = 0.0;
    for (const double b : beta) weight_sum += b;
    const double last_weight = 1.0 - weight_sum;
    double inner = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      double e = last_weight * table[n - 1][p];
      for (std::size_t x = 0; x + 1 < n; ++x) e += beta[x] * table[x][p];
      if (e < inner) {
        inner = e;
        arg = p;
      }
    }
    if (inner > best.value) best = {beta, points[arg], inner};
  };

  const double denom = static_cast<double>(g - 1);
  if (n == 2) {
    for (std::size_t i = 0; i < g; ++i) consider({static_cast<double>(i) / denom});
  } else {
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; i + j < g; ++j) {
        consider({static_cast<double>(i) / denom, static_cast<double>(j) / denom});
      }
    }
  }
  return best;
}

std::vector<double> finite_difference_gradient(const Expr& f, std::span<const std::string> vars,
                                               std::span<const double> point, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::kInvalidArgument, "finite-difference step must be > 0");
  if (vars.size() != point.size()) throw Error(ErrorKind::kDimension, "point/variable mismatch");
  Binding binding;
  for (std::size_t i = 0; i < vars.size(); ++i) binding[vars[i]] = point[i];
  std::vector<double> g(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Binding plus = binding;
    Binding minus = binding;
    plus[vars[i]] = point[i] + h;
    minus[vars[i]] = point[i] - h;
    g[i] = (evaluate(f, plus) - evaluate(f, minus)) / (2.0 * h);
  }
  return g;
}

bool mu_grid_feasibility(std::span<const double> grad_objective,
                         const std::vector<std::vector<double>>& generators, double mu_max,
                         double step) {
  if (generators.size() > 3) throw Error(ErrorKind::kDimension, "mu grid oracle supports <= 3 constraints");
  const std::size_t dim = grad_objective.size();
  double grad_norm = 0.0;
  for (const double v : grad_objective) grad_norm += v * v;
  grad_norm = std::sqrt(grad_norm);
  const double threshold = kMuGridResidualTol * (1.0 + grad_norm);
  const auto steps = static_cast<std::size_t>(std::llround(mu_max / step));

  auto residual_norm = [&](const std::vector<double>& r) {
    double s = 0.0;
    for (const double v : r) s += v * v;
    return std::sqrt(s);
  };

  const std::size_t k = generators.size();
  if (k == 0) return grad_norm <= threshold;

  const std::vector<double>& last = generators[k - 1];
  double last_sq = 0.0;
  for (const double v : last) last_sq += v * v;

  std::vector<std::size_t> index(k - 1, 0);
  std::vector<double> r(dim);
  for (;;) {
    for (std::size_t i = 0; i < dim; ++i) {
      r[i] = grad_objective[i];
      for (std::size_t y = 0; y + 1 < k; ++y) {
        r[i] -= static_cast<double>(index[y]) * step * generators[y][i];
      }
    }
    double t = 0.0;
    if (last_sq > 0.0) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += last[i] * r[i];
      t = std::clamp(dot / last_sq / step, 0.0, static_cast<double>(steps));
    }
    for (const double candidate : {std::floor(t), std::ceil(t)}) {
      const double mu = candidate * step;
      std::vector<double> res(dim);
      for (std::size_t i = 0; i < dim; ++i) res[i] = r[i] - mu * last[i];
      if (residual_norm(res) <= threshold) return true;
    }
    std::size_t y = k - 1;
    for (;;) {
      if (y == 0) return false;
      --y;
      if (++index[y] <= steps) break;
      index[y] = 0;
    }
  }
}

}  // namespace kktscope::oracle
