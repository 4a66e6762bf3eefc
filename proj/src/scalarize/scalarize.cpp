#include "kktscope/scalarize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "kktscope/errors.hpp"
#include "kktscope/parallel.hpp"

namespace kktscope {
namespace {

class Objectives {
 public:
  explicit Objectives(const ScalarizationProblem& problem) {
    for (const auto& o : problem.objectives) compiled_.emplace_back(o, problem.variables);
  }

  double objective(std::size_t x, std::span<const double> r) const { return compiled_[x](r); }

  double cost(const WeightVector& beta, std::span<const double> r) const {
    const std::size_t last = compiled_.size() - 1;
    const double o_last = compiled_[last](r);
    double e = o_last;
    const auto w = beta.leading();
    for (std::size_t x = 0; x < last; ++x) {
      if (w[x] != 0.0) e += w[x] * (compiled_[x](r) - o_last);
    }
    return e;
  }

  std::size_t size() const { return compiled_.size(); }

 private:
  std::vector<CompiledExpr> compiled_;
};

void check_beta(const ScalarizationProblem& problem, const WeightVector& beta) {
  if (beta.objective_count() != problem.objectives.size()) {
    throw Error(ErrorKind::kSimplexViolation,
                fmt::format("weight vector has {} entries, expected {}", beta.leading().size(),
                            problem.objectives.size() - 1));
  }
}

double guarded_cost(const Objectives& objectives, const WeightVector& beta,
                    std::span<const double> r) {
  try {
    return objectives.cost(beta, r);
  } catch (const NumericDomainError& e) {
    throw NumericDomainError(fmt::format("at r = ({}): {}", fmt::join(r, ", "), e.what()));
  }
}

struct LineMin {
  double x;
  double value;
  double width;
};

// Golden-section search on [lo, hi]; returns the best point evaluated.
LineMin golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  LineMin best{c, fc, b - a};
  if (fd < best.value) best = {d, fd, b - a};
  for (int guard = 0; guard < 200 && (b - a) >= tol; ++guard) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      if (fc < best.value || (fc == best.value && c < best.x)) best = {c, fc, 0.0};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      if (fd < best.value || (fd == best.value && d < best.x)) best = {d, fd, 0.0};
    }
  }
  best.width = b - a;
  return best;
}

double lattice_point(const Interval& box, std::size_t i, std::size_t grid) {
  return box.lower + (box.upper - box.lower) * static_cast<double>(i) / static_cast<double>(grid - 1);
}

EStarSample minimize_with(const ScalarizationProblem& problem, const Objectives& objectives,
                          const WeightVector& beta, std::size_t grid) {
  const std::size_t dims = problem.variables.size();
  std::vector<std::size_t> index(dims, 0);
  std::vector<double> r(dims);
  std::vector<double> best_r(dims);
  double best = std::numeric_limits<double>::infinity();

  // Row-major scan; strict comparison keeps the lexicographically first minimizer.
  for (bool more = true; more;) {
    for (std::size_t k = 0; k < dims; ++k) r[k] = lattice_point(problem.domain[k], index[k], grid);
    const double e = guarded_cost(objectives, beta, r);
    if (e < best) {
      best = e;
      best_r = r;
    }
    more = false;
    for (std::size_t k = dims; k-- > 0;) {
      if (++index[k] < grid) {
        more = true;
        break;
      }
      index[k] = 0;
    }
  }

  std::vector<double> half_width(dims);
  for (std::size_t k = 0; k < dims; ++k) {
    half_width[k] = (problem.domain[k].upper - problem.domain[k].lower) / static_cast<double>(grid - 1);
  }

  std::vector<double> current = best_r;
  double current_value = best;
  double residual = 0.0;
  for (int cycle = 0; cycle < 64; ++cycle) {
    double cycle_width = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
      const Interval& box = problem.domain[k];
      const double lo = std::max(box.lower, current[k] - half_width[k]);
      const double hi = std::min(box.upper, current[k] + half_width[k]);
      if (!(hi > lo)) continue;
      std::vector<double> probe = current;
      const LineMin line = golden_section(
          [&](double t) {
            probe[k] = t;
            return guarded_cost(objectives, beta, probe);
          },
          lo, hi, kInnerStepTol);
      cycle_width = std::max(cycle_width, line.width);
      if (line.value < current_value) {
        current[k] = line.x;
        current_value = line.value;
      }
    }
    residual = cycle_width;
    if (dims == 1) break;
    bool done = true;
    for (double& w : half_width) {
      w *= 0.5;
      if (w >= kInnerStepTol) done = false;
    }
    if (done) break;
  }

  return EStarSample{beta, current, current_value, residual};
}

}  // namespace

void validate(const ScalarizationProblem& problem) {
  if (problem.objectives.size() < 2) {
    throw SchemaError("objectives", "scalarization needs at least two objectives");
  }
  if (problem.variables.empty() || problem.variables.size() > kMaxResourceDims) {
    throw SchemaError("variables", fmt::format("between 1 and {} resource variables required",
                                               kMaxResourceDims));
  }
  if (problem.domain.size() != problem.variables.size()) {
    throw SchemaError("variables", "one interval per variable required");
  }
  for (std::size_t i = 0; i < problem.domain.size(); ++i) {
    const Interval& box = problem.domain[i];
    if (!std::isfinite(box.lower) || !std::isfinite(box.upper) || box.lower > box.upper) {
      throw SchemaError(fmt::format("variables[{}]", i),
                        "domain must be bounded with lower <= upper");
    }
  }
  for (std::size_t x = 0; x < problem.objectives.size(); ++x) {
    for (const auto& v : variables_of(problem.objectives[x])) {
      if (std::find(problem.variables.begin(), problem.variables.end(), v) ==
          problem.variables.end()) {
        throw SchemaError(fmt::format("objectives[{}]", x), "undeclared variable '" + v + "'");
      }
    }
  }
}

WeightVector::WeightVector(std::vector<double> leading) : leading_(std::move(leading)) {
  double sum = 0.0;
  for (std::size_t x = 0; x < leading_.size(); ++x) {
    const double b = leading_[x];
    if (!(b >= 0.0 && b <= 1.0)) {
      throw Error(ErrorKind::kSimplexViolation,
                  fmt::format("beta_{} = {} outside [0, 1]", x + 1, b));
    }
    sum += b;
  }
  if (sum > 1.0 + 1e-12) {
    throw Error(ErrorKind::kSimplexViolation, fmt::format("weights sum to {} > 1", sum));
  }
}

double WeightVector::last() const {
  const double sum = std::accumulate(leading_.begin(), leading_.end(), 0.0);
  return std::max(0.0, 1.0 - sum);
}

double cost(const ScalarizationProblem& problem, const WeightVector& beta,
            std::span<const double> r) {
  check_beta(problem, beta);
  return Objectives(problem).cost(beta, r);
}

EStarSample inner_minimize(const ScalarizationProblem& problem, const WeightVector& beta,
                           std::size_t grid) {
  check_beta(problem, beta);
  if (grid < 2) throw Error(ErrorKind::kInvalidArgument, "inner grid must be at least 2");
  return minimize_with(problem, Objectives(problem), beta, grid);
}

std::vector<WeightVector> simplex_lattice(std::size_t objective_count, std::size_t resolution) {
  if (objective_count < 2) throw Error(ErrorKind::kInvalidArgument, "need at least 2 objectives");
  if (resolution < 1) throw Error(ErrorKind::kInvalidArgument, "lattice resolution must be positive");
  const std::size_t dims = objective_count - 1;
  std::vector<WeightVector> lattice;
  std::vector<std::size_t> k(dims, 0);
  const auto denom = static_cast<double>(resolution);
  for (;;) {
    std::vector<double> beta(dims);
    for (std::size_t x = 0; x < dims; ++x) beta[x] = static_cast<double>(k[x]) / denom;
    lattice.emplace_back(std::move(beta));
    // Odometer increment over compositions with sum <= resolution, last index fastest.
    std::size_t pos = dims;
    for (;;) {
      if (pos == 0) return lattice;
      --pos;
      ++k[pos];
      const std::size_t sum = std::accumulate(k.begin(), k.end(), std::size_t{0});
      if (sum <= resolution) break;
      k[pos] = 0;
    }
  }
}

std::size_t default_beta_grid(std::size_t objective_count) {
  return objective_count <= 2 ? 64 : 32;
}

EStarCurve sample_estar_curve(const ScalarizationProblem& problem, std::size_t beta_grid,
                              std::size_t inner_grid) {
  if (beta_grid < 2) throw Error(ErrorKind::kInvalidArgument, "beta grid must be at least 2");
  if (inner_grid < 2) throw Error(ErrorKind::kInvalidArgument, "inner grid must be at least 2");
  const auto lattice = simplex_lattice(problem.objectives.size(), beta_grid);
  const Objectives objectives(problem);
  std::vector<std::optional<EStarSample>> slots(lattice.size());
  parallel_for(lattice.size(), [&](std::size_t i) {
    slots[i] = minimize_with(problem, objectives, lattice[i], inner_grid);
  });
  EStarCurve curve;
  curve.samples.reserve(slots.size());
  for (auto& s : slots) curve.samples.push_back(std::move(*s));
  return curve;
}

double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

namespace {

WeightVector draw_simplex(std::mt19937_64& rng, std::size_t objective_count) {
  // Spacings of sorted uniforms are uniform on the simplex.
  std::vector<double> cuts(objective_count - 1);
  for (double& c : cuts) c = unit_uniform(rng());
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> leading(objective_count - 1);
  double prev = 0.0;
  for (std::size_t x = 0; x < cuts.size(); ++x) {
    leading[x] = cuts[x] - prev;
    prev = cuts[x];
  }
  return WeightVector(std::move(leading));
}

WeightVector mix(const WeightVector& a, const WeightVector& b, double alpha) {
  std::vector<double> out(a.leading().size());
  for (std::size_t x = 0; x < out.size(); ++x) {
    out[x] = std::clamp(alpha * a.leading()[x] + (1.0 - alpha) * b.leading()[x], 0.0, 1.0);
  }
  return WeightVector(std::move(out));
}

}  // namespace

CurvatureReport check_estar_curvature(const ScalarizationProblem& problem, std::size_t trials,
                                      std::uint64_t seed, std::size_t inner_grid) {
  if (trials < 1) throw Error(ErrorKind::kInvalidArgument, "InvalidTrials: trials must be >= 1");
  if (inner_grid < 2) throw Error(ErrorKind::kInvalidArgument, "inner grid must be at least 2");
  const std::size_t n = problem.objectives.size();

  std::mt19937_64 rng(seed);
  CurvatureReport report;
  report.trials.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    WeightVector beta = draw_simplex(rng, n);
    WeightVector beta_prime = draw_simplex(rng, n);
    const double alpha = unit_uniform(rng());
    report.trials.push_back(CurvatureTrial{beta, beta_prime, alpha});
  }

  const Objectives objectives(problem);
  parallel_for(trials, [&](std::size_t t) {
    CurvatureTrial& trial = report.trials[t];
    const WeightVector mixed = mix(trial.beta, trial.beta_prime, trial.alpha);
    trial.e_beta = minimize_with(problem, objectives, trial.beta, inner_grid).e_star;
    trial.e_beta_prime = minimize_with(problem, objectives, trial.beta_prime, inner_grid).e_star;
    trial.e_mix = minimize_with(problem, objectives, mixed, inner_grid).e_star;
    trial.slack_paper =
        trial.alpha * trial.e_beta + (1.0 - trial.alpha) * trial.e_beta_prime - trial.e_mix;
    trial.slack_reverse = -trial.slack_paper;
  });

  report.min_slack_paper = std::numeric_limits<double>::infinity();
  report.min_slack_reverse = std::numeric_limits<double>::infinity();
  for (const CurvatureTrial& trial : report.trials) {
    if (trial.slack_paper >= -kCurvatureTol) ++report.paper_holds;
    if (trial.slack_reverse >= -kCurvatureTol) ++report.reverse_holds;
    if (std::abs(trial.slack_paper) <= kCurvatureTol) ++report.both_hold;
    report.min_slack_paper = std::min(report.min_slack_paper, trial.slack_paper);
    report.min_slack_reverse = std::min(report.min_slack_reverse, trial.slack_reverse);
  }
  return report;
}

std::vector<double> envelope_derivative(const ScalarizationProblem& problem,
                                        const WeightVector& beta, const EStarSample& sample) {
  check_beta(problem, beta);
  const Objectives objectives(problem);
  const std::size_t last = objectives.size() - 1;
  const double o_last = objectives.objective(last, sample.r_star);
  std::vector<double> d(last);
  for (std::size_t x = 0; x < last; ++x) d[x] = objectives.objective(x, sample.r_star) - o_last;
  return d;
}

OuterResult outer_maximize_beta(const ScalarizationProblem& problem, std::size_t beta_grid,
                                std::size_t inner_grid) {
  const EStarCurve curve = sample_estar_curve(problem, beta_grid, inner_grid);
  std::size_t best_index = 0;
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    if (curve.samples[i].e_star > curve.samples[best_index].e_star) best_index = i;
  }

  const Objectives objectives(problem);
  OuterResult result{curve.samples[best_index].beta, curve.samples[best_index],
                     curve.samples[best_index], curve.samples.size()};
  std::vector<double> current(result.beta.leading().begin(), result.beta.leading().end());
  const std::size_t dims = current.size();

  double step = 1.0 / static_cast<double>(beta_grid);
  for (int guard = 0; guard < 100000 && step >= kOuterStepFloor; ++guard) {
    bool improved = false;
    for (std::size_t x = 0; x < dims && !improved; ++x) {
      for (const double direction : {1.0, -1.0}) {
        std::vector<double> candidate = current;
        double others = 0.0;
        for (std::size_t k = 0; k < dims; ++k) {
          if (k != x) others += candidate[k];
        }
        candidate[x] = std::clamp(candidate[x] + direction * step, 0.0, std::max(0.0, 1.0 - others));
        if (candidate[x] == current[x]) continue;
        const WeightVector beta(candidate);
        EStarSample sample = minimize_with(problem, objectives, beta, inner_grid);
        ++result.inner_solves;
        if (sample.e_star > result.sample.e_star) {
          current = std::move(candidate);
          result.beta = beta;
          result.sample = std::move(sample);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return result;
}

DegenerateReport degenerate_single_objective(const ScalarizationProblem& problem,
                                             std::size_t beta_grid, std::size_t inner_grid,
                                             std::uint64_t seed) {
  if (beta_grid < 2) throw Error(ErrorKind::kInvalidArgument, "beta grid must be at least 2");
  if (inner_grid < 2) throw Error(ErrorKind::kInvalidArgument, "inner grid must be at least 2");
  const Objectives objectives(problem);
  const std::size_t dims = problem.variables.size();

  std::mt19937_64 rng(seed);
  std::vector<double> r(dims);
  for (std::size_t s = 0; s < kPremiseSamples; ++s) {
    for (std::size_t k = 0; k < dims; ++k) {
      const Interval& box = problem.domain[k];
      r[k] = box.lower + (box.upper - box.lower) * unit_uniform(rng());
    }
    for (std::size_t x = 1; x < objectives.size(); ++x) {
      const double v = objectives.objective(x, r);
      if (std::abs(v) > kPremiseZeroTol) {
        throw Error(ErrorKind::kPremiseViolation,
                    fmt::format("objective {} is {} at r = ({}); the single-objective limit "
                                "needs every objective after the first to vanish",
                                x + 1, v, fmt::join(r, ", ")));
      }
    }
  }

  const std::size_t n = problem.objectives.size();
  std::vector<WeightVector> betas;
  for (std::size_t k = 0; k <= beta_grid; ++k) {
    std::vector<double> leading(n - 1, 0.0);
    leading[0] = static_cast<double>(k) / static_cast<double>(beta_grid);
    betas.emplace_back(std::move(leading));
  }
  std::vector<std::optional<EStarSample>> slots(betas.size());
  parallel_for(betas.size(), [&](std::size_t i) {
    slots[i] = minimize_with(problem, objectives, betas[i], inner_grid);
  });

  DegenerateReport report;
  for (auto& s : slots) report.samples.push_back(std::move(*s));
  const EStarSample& at_one = report.samples.back();
  report.e_star_at_one = at_one.e_star;
  report.r_star_at_one = at_one.r_star;

  for (std::size_t i = 1; i < report.samples.size(); ++i) {
    const EStarSample& s = report.samples[i];
    const double b1 = s.beta.leading()[0];
    report.max_ratio_gap = std::max(report.max_ratio_gap, std::abs(s.e_star / b1 - report.e_star_at_one));
    for (std::size_t k = 0; k < dims; ++k) {
      report.max_r_drift = std::max(report.max_r_drift, std::abs(s.r_star[k] - at_one.r_star[k]));
    }
  }
  report.linear_in_beta = report.max_ratio_gap <= kDegenerateRatioTol;
  report.r_star_independent = report.max_r_drift <= kDegenerateDriftTol;
  // The refined minimum of an O1 touching zero lands a rounding error above it.
  if (report.e_star_at_one <= kPremiseZeroTol) {
    report.warnings.push_back(fmt::format(
        "E*(1) = min of objective 1 = {} is not positive; the single-objective limit assumes "
        "O1 > 0",
        report.e_star_at_one));
  }
  return report;
}

}  // namespace kktscope
