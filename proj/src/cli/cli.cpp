#include "kktscope/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "kktscope/kkt.hpp"
#include "kktscope/oracle.hpp"
#include "kktscope/problem_file.hpp"
#include "kktscope/scalarize.hpp"

namespace kktscope {

std::string format_real(double value) {
  if (value == 0.0) return "0";  // no "-0"
  return fmt::format("{:.17g}", value);
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax:
    case ErrorKind::kNonConstantExponent:
    case ErrorKind::kUnboundVariable:
    case ErrorKind::kVariableNameClash:
    case ErrorKind::kIo:
    case ErrorKind::kSchema:
      return kExitInput;
    case ErrorKind::kNumericDomain:
    case ErrorKind::kZeroConstraintGradient:
    case ErrorKind::kZeroObjectiveGradient:
    case ErrorKind::kSimplexViolation:
      return kExitNumeric;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kDimension:
      return kExitUsage;
    case ErrorKind::kPremiseViolation:
      return kExitPremise;
  }
  return kExitUsage;
}

namespace {

std::string vec(std::span<const double> v) {
  std::vector<std::string> parts;
  for (const double x : v) parts.push_back(format_real(x));
  return fmt::format("({})", fmt::join(parts, ", "));
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Output {
  std::ostringstream report;
  std::vector<std::string> warnings;
  std::optional<std::string> csv;
};

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

  void row(std::initializer_list<std::string> cells) { row_strings(std::vector<std::string>(cells)); }

  void row_strings(const std::vector<std::string>& cells) {
    out_ << fmt::format("{}\n", fmt::join(cells, ","));
    ++rows_;
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  std::size_t rows_ = 0;
};

const Problem& require_kkt(const ProblemFile& file) {
  if (!file.kkt) throw SchemaError("kind", "this command needs a \"kkt\" problem file");
  return *file.kkt;
}

const ScalarizationProblem& require_scalarize(const ProblemFile& file) {
  if (!file.scalarize) throw SchemaError("kind", "this command needs a \"scalarize\" problem file");
  return *file.scalarize;
}

std::vector<double> query_point(const ProblemFile& file, const std::vector<double>& flag) {
  if (!flag.empty()) return flag;
  if (file.point) return *file.point;
  throw UsageError("no query point: pass --point or set `point` in the problem file");
}

// ---------------------------------------------------------------------------
// kkt

void write_analysis(const Problem& problem, const AnalysisReport& report, std::ostream& os) {
  os << "case: " << to_string(report.tag) << '\n';
  os << "sense: " << to_string(problem.sense) << '\n';
  os << "variables: " << fmt::format("{}", fmt::join(problem.variables, ", ")) << '\n';
  os << "point: " << vec(report.point) << '\n';
  os << "tolerance: " << format_real(report.tol) << '\n';
  std::vector<std::size_t> active_one_based;
  for (const auto y : report.active) active_one_based.push_back(y + 1);
  os << "active constraints: {" << fmt::format("{}", fmt::join(active_one_based, ", ")) << "}\n";
  for (const ObjectiveReport& obj : report.objectives) {
    const std::size_t x = obj.objective;
    os << "objective " << x + 1 << ": " << problem.objectives[x].to_string() << '\n';
    os << "  value: " << format_real(obj.value) << '\n';
    os << "  gradient: " << vec(obj.gradient) << '\n';
    os << "  lagrangian: " << build_lagrangian(problem, x).to_string() << '\n';
    os << "  multipliers ("
       << (obj.estimate.closed_form ? "closed-form ratio" : "nonnegative least squares") << "):\n";
    for (std::size_t y = 0; y < problem.constraints.size(); ++y) {
      os << "    " << multiplier_name(y) << " = " << format_real(obj.estimate.mu[y]) << "  "
         << to_string(obj.estimate.sign_class[y]) << "  "
         << (obj.estimate.active[y] ? "active" : "inactive") << '\n';
    }
    os << "  stationarity residual: " << format_real(obj.estimate.stationarity_residual) << '\n';
    os << "  cone: " << to_string(obj.cone.verdict) << " (residual "
       << format_real(obj.cone.residual) << ")\n";
    os << "  sign table:\n";
    for (const ConstraintReport& c : obj.constraints) {
      auto sign = [](const std::optional<Sign>& s) -> std::string_view {
        return s ? to_string(*s) : "indefinite";
      };
      os << "    constraint " << c.index + 1 << " [" << to_string(c.pure_case) << "]: grad O "
         << sign(c.objective_sign) << ", grad C " << sign(c.constraint_sign) << " -> "
         << (c.table ? to_string(*c.table) : std::string_view("n/a")) << '\n';
    }
  }
}

void kkt_analyze(const ProblemFile& file, const std::vector<double>& point_flag,
                 std::optional<double> tol_flag, Output& output) {
  const Problem& problem = require_kkt(file);
  const std::vector<double> point = query_point(file, point_flag);
  const double tol = tol_flag.value_or(file.tol.value_or(1e-6));
  const AnalysisReport report = analyze(problem, point, tol);
  output.warnings = report.warnings;
  write_analysis(problem, report, output.report);
}

void kkt_plot(const ProblemFile& file, const std::vector<double>& point_flag,
              std::optional<double> tol_flag, std::optional<std::size_t> grid_flag,
              Output& output) {
  const Problem& problem = require_kkt(file);
  const std::vector<double> point = query_point(file, point_flag);
  const double tol = tol_flag.value_or(file.tol.value_or(1e-6));
  const std::size_t grid = grid_flag.value_or(file.plot_grid.value_or(50));
  const auto records = emit_cone_plot_data(problem, point, grid, tol);
  output.warnings = validate(problem);

  CsvWriter csv({"kind", "x1", "x2", "dx1", "dx2", "label"});
  std::size_t levels = 0;
  for (const PlotRecord& r : records) {
    if (r.kind == "level") ++levels;
    csv.row({r.kind, format_real(r.x1), format_real(r.x2), format_real(r.dx1), format_real(r.dx2),
             r.label});
  }
  output.csv = csv.str();
  output.report << "case: " << to_string(classify_case(problem)) << '\n';
  output.report << "point: " << vec(point) << '\n';
  output.report << "grid: " << grid << '\n';
  output.report << "records: " << records.size() << " (" << levels << " level, "
                << records.size() - levels << " arrow)\n";
  for (const PlotRecord& r : records) {
    if (r.kind == "arrow") {
      output.report << "arrow " << r.label << ": " << vec(std::vector<double>{r.dx1, r.dx2}) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// scalarize

std::vector<std::string> curve_header(const ScalarizationProblem& problem) {
  std::vector<std::string> header;
  for (std::size_t x = 1; x < problem.objectives.size(); ++x) header.push_back(fmt::format("beta_{}", x));
  for (std::size_t k = 1; k <= problem.variables.size(); ++k) header.push_back(fmt::format("r_{}", k));
  header.push_back("e_star");
  header.push_back("residual");
  return header;
}

std::vector<std::string> curve_row(const EStarSample& s) {
  std::vector<std::string> row;
  for (const double b : s.beta.leading()) row.push_back(format_real(b));
  for (const double r : s.r_star) row.push_back(format_real(r));
  row.push_back(format_real(s.e_star));
  row.push_back(format_real(s.inner_residual));
  return row;
}

std::string sample_line(const EStarSample& s) {
  return fmt::format("beta = {} -> r* = {}, E* = {}", vec(s.beta.leading()), vec(s.r_star),
                     format_real(s.e_star));
}

struct Grids {
  std::optional<std::size_t> beta;
  std::optional<std::size_t> inner;
};

std::size_t beta_grid_for(const ProblemFile& file, const ScalarizationProblem& p, const Grids& g) {
  return g.beta.value_or(file.beta_grid.value_or(default_beta_grid(p.objectives.size())));
}

std::size_t inner_grid_for(const ProblemFile& file, const Grids& g) {
  return g.inner.value_or(file.inner_grid.value_or(kDefaultInnerGrid));
}

void scalarize_curve(const ProblemFile& file, const Grids& grids, Output& output) {
  const ScalarizationProblem& problem = require_scalarize(file);
  const std::size_t beta_grid = beta_grid_for(file, problem, grids);
  const std::size_t inner_grid = inner_grid_for(file, grids);
  const EStarCurve curve = sample_estar_curve(problem, beta_grid, inner_grid);

  CsvWriter csv(curve_header(problem));
  for (const EStarSample& s : curve.samples) csv.row_strings(curve_row(s));
  output.csv = csv.str();

  output.report << "objectives: " << problem.objectives.size() << '\n';
  output.report << "beta grid: " << beta_grid << ", inner grid: " << inner_grid << '\n';
  output.report << "samples: " << curve.samples.size() << '\n';
  for (const EStarSample& s : curve.samples) {
    output.report << "  " << sample_line(s) << '\n';
    if (problem.expect_positive && s.e_star <= 0.0) {
      output.warnings.push_back(fmt::format("E* = {} is not positive at beta = {}",
                                            format_real(s.e_star), vec(s.beta.leading())));
    }
  }
}

void scalarize_maximize(const ProblemFile& file, const Grids& grids, Output& output) {
  const ScalarizationProblem& problem = require_scalarize(file);
  const std::size_t beta_grid = beta_grid_for(file, problem, grids);
  const std::size_t inner_grid = inner_grid_for(file, grids);
  const OuterResult result = outer_maximize_beta(problem, beta_grid, inner_grid);

  CsvWriter csv(curve_header(problem));
  csv.row_strings(curve_row(result.sample));
  output.csv = csv.str();

  output.report << "beta grid: " << beta_grid << ", inner grid: " << inner_grid << '\n';
  output.report << "lattice best: " << sample_line(result.lattice_best) << '\n';
  output.report << "beta*: " << vec(result.beta.leading()) << '\n';
  output.report << "beta_n: " << format_real(result.beta.last()) << '\n';
  output.report << "r*: " << vec(result.sample.r_star) << '\n';
  output.report << "E*: " << format_real(result.sample.e_star) << '\n';
  output.report << "inner solves: " << result.inner_solves << '\n';
  const auto slope = envelope_derivative(problem, result.beta, result.sample);
  output.report << "envelope derivative at beta*: " << vec(slope) << '\n';
}

void scalarize_curvature(const ProblemFile& file, std::optional<std::size_t> trials_flag,
                         std::optional<std::uint64_t> seed_flag, const Grids& grids,
                         Output& output) {
  const ScalarizationProblem& problem = require_scalarize(file);
  const std::size_t trials = trials_flag.value_or(file.trials.value_or(100));
  const std::uint64_t seed = seed_flag.value_or(file.seed.value_or(0));
  const std::size_t inner_grid = inner_grid_for(file, grids);
  const CurvatureReport report = check_estar_curvature(problem, trials, seed, inner_grid);

  CsvWriter csv({"alpha", "slack_paper", "slack_reverse"});
  for (const CurvatureTrial& t : report.trials) {
    csv.row({format_real(t.alpha), format_real(t.slack_paper), format_real(t.slack_reverse)});
  }
  output.csv = csv.str();

  auto& os = output.report;
  os << "trials: " << trials << ", seed: " << seed << ", inner grid: " << inner_grid << '\n';
  os << "tolerance: " << format_real(kCurvatureTol) << '\n';
  os << "convex-combination inequality E*(mix) <= a E*(b) + (1-a) E*(b'): " << report.paper_holds
     << "/" << trials << " hold\n";
  os << "reverse inequality E*(mix) >= a E*(b) + (1-a) E*(b'): " << report.reverse_holds << "/"
     << trials << " hold\n";
  os << "both within tolerance (locally affine): " << report.both_hold << "/" << trials << '\n';
  os << "min slack_paper: " << format_real(report.min_slack_paper) << '\n';
  os << "min slack_reverse: " << format_real(report.min_slack_reverse) << '\n';
}

void scalarize_degenerate(const ProblemFile& file, std::optional<std::uint64_t> seed_flag,
                          const Grids& grids, Output& output) {
  const ScalarizationProblem& problem = require_scalarize(file);
  const std::size_t beta_grid = beta_grid_for(file, problem, grids);
  const std::size_t inner_grid = inner_grid_for(file, grids);
  const std::uint64_t seed = seed_flag.value_or(file.seed.value_or(0));
  const DegenerateReport report = degenerate_single_objective(problem, beta_grid, inner_grid, seed);
  output.warnings = report.warnings;

  CsvWriter csv(curve_header(problem));
  for (const EStarSample& s : report.samples) csv.row_strings(curve_row(s));
  output.csv = csv.str();

  auto& os = output.report;
  os << "beta grid: " << beta_grid << ", inner grid: " << inner_grid << '\n';
  os << "E*(1): " << format_real(report.e_star_at_one) << '\n';
  os << "r*(1): " << vec(report.r_star_at_one) << '\n';
  os << "E*(beta)/beta_1 constant: " << (report.linear_in_beta ? "yes" : "no") << " (max gap "
     << format_real(report.max_ratio_gap) << ")\n";
  os << "r*(beta) independent of beta: " << (report.r_star_independent ? "yes" : "no")
     << " (max drift " << format_real(report.max_r_drift) << ")\n";
  for (const EStarSample& s : report.samples) {
    os << "  " << sample_line(s);
    if (s.beta.leading()[0] == 0.0) os << "  [degenerate: zero weight]";
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// oracle

void oracle_min(const ProblemFile& file, std::size_t objective, std::size_t grid, Output& output) {
  const std::vector<Expr>& objectives =
      file.kkt ? file.kkt->objectives : file.scalarize->objectives;
  const std::vector<std::string>& vars = file.kkt ? file.kkt->variables : file.scalarize->variables;
  const std::vector<Interval>& domain = file.kkt ? file.kkt->domain : file.scalarize->domain;
  if (objective < 1 || objective > objectives.size()) throw UsageError("objective index out of range");
  oracle::OracleConfig config;
  config.grid_points = grid;
  const auto result = oracle::brute_force_min(objectives[objective - 1], vars, domain, config);
  output.report << "argmin: " << vec(result.argmin) << '\n';
  output.report << "min: " << format_real(result.value) << '\n';
}

void oracle_saddle(const ProblemFile& file, std::size_t grid, Output& output) {
  oracle::OracleConfig config;
  config.grid_points = grid;
  const auto result = oracle::brute_force_saddle(require_scalarize(file), config);
  output.report << "beta*: " << vec(result.beta) << '\n';
  output.report << "r*: " << vec(result.r_star) << '\n';
  output.report << "value: " << format_real(result.value) << '\n';
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << contents;
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "error while writing '" + path + "'");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analyze KKT multipliers and weighted-sum scalarizations", "kktscope"};
  app.require_subcommand(1);

  std::string file_path;
  std::string out_path;
  bool strict = false;
  std::vector<double> point;
  std::optional<double> tol;
  std::optional<std::size_t> plot_grid;
  Grids grids;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::size_t oracle_objective = 1;
  std::size_t oracle_grid = 1001;
  std::function<void(const ProblemFile&, Output&)> action;

  auto add_file = [&](CLI::App* cmd) {
    cmd->add_option("file", file_path, "Problem file")->required();
    cmd->add_flag("--strict", strict, "Treat warnings as errors (exit 4)");
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "Write the CSV data to this path");
  };
  auto add_grids = [&](CLI::App* cmd) {
    cmd->add_option("--beta-grid", grids.beta, "Weight lattice resolution")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    cmd->add_option("--inner-grid", grids.inner, "Inner grid points per dimension")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a problem file");
  add_file(validate_cmd);
  validate_cmd->callback([&] {
    action = [](const ProblemFile& file, Output& output) {
      output.warnings = file.warnings;
      if (file.kkt) {
        output.report << "ok: kind kkt, " << to_string(classify_case(*file.kkt)) << ", "
                      << file.kkt->variables.size() << " variable(s), "
                      << file.kkt->objectives.size() << " objective(s), "
                      << file.kkt->constraints.size() << " constraint(s)\n";
      } else {
        output.report << "ok: kind scalarize, " << file.scalarize->variables.size()
                      << " resource variable(s), " << file.scalarize->objectives.size()
                      << " objective(s)\n";
      }
    };
  });

  auto* kkt_cmd = app.add_subcommand("kkt", "KKT multiplier analysis");
  kkt_cmd->require_subcommand(1);
  auto* analyze_cmd = kkt_cmd->add_subcommand("analyze", "Analyze multipliers at a point");
  add_file(analyze_cmd);
  analyze_cmd->add_option("--point", point, "Query point, comma separated")->delimiter(',');
  analyze_cmd->add_option("--tol", tol, "Active-set and cone tolerance")
      ->check(CLI::PositiveNumber);
  analyze_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) { kkt_analyze(file, point, tol, output); };
  });
  auto* plot_cmd = kkt_cmd->add_subcommand("plot", "Emit planar cone plot data as CSV");
  add_file(plot_cmd);
  add_out(plot_cmd);
  plot_cmd->add_option("--point", point, "Query point, comma separated")->delimiter(',');
  plot_cmd->add_option("--tol", tol, "Active-set and cone tolerance")->check(CLI::PositiveNumber);
  plot_cmd->add_option("--grid", plot_grid, "Samples per axis")->check(CLI::PositiveNumber);
  plot_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) {
      kkt_plot(file, point, tol, plot_grid, output);
    };
  });

  auto* scal_cmd = app.add_subcommand("scalarize", "Weighted-sum scalarization");
  scal_cmd->require_subcommand(1);
  auto* curve_cmd = scal_cmd->add_subcommand("curve", "Sample E* over the weight lattice");
  add_file(curve_cmd);
  add_out(curve_cmd);
  add_grids(curve_cmd);
  curve_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) { scalarize_curve(file, grids, output); };
  });
  auto* max_cmd = scal_cmd->add_subcommand("maximize", "Find the weight maximizing E*");
  add_file(max_cmd);
  add_out(max_cmd);
  add_grids(max_cmd);
  max_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) {
      scalarize_maximize(file, grids, output);
    };
  });
  auto* curv_cmd = scal_cmd->add_subcommand("curvature", "Probe convexity/concavity of E*");
  add_file(curv_cmd);
  add_out(curv_cmd);
  curv_cmd->add_option("--inner-grid", grids.inner, "Inner grid points per dimension")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  curv_cmd->add_option("--trials", trials, "Number of random trials")
      ->check(CLI::PositiveNumber);
  curv_cmd->add_option("--seed", seed, "Random seed");
  curv_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) {
      scalarize_curvature(file, trials, seed, grids, output);
    };
  });
  auto* deg_cmd = scal_cmd->add_subcommand("degenerate", "Check the single-objective limit");
  add_file(deg_cmd);
  add_out(deg_cmd);
  add_grids(deg_cmd);
  deg_cmd->add_option("--seed", seed, "Seed for the premise sampling");
  deg_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) {
      scalarize_degenerate(file, seed, grids, output);
    };
  });

  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force reference computations");
  oracle_cmd->group("");
  oracle_cmd->require_subcommand(1);
  auto* omin_cmd = oracle_cmd->add_subcommand("min", "Grid minimum of one objective");
  add_file(omin_cmd);
  omin_cmd->add_option("--objective", oracle_objective, "1-based objective index");
  omin_cmd->add_option("--grid", oracle_grid, "Grid points per dimension")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  omin_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) {
      oracle_min(file, oracle_objective, oracle_grid, output);
    };
  });
  auto* osad_cmd = oracle_cmd->add_subcommand("saddle", "Grid max-min over weights and resources");
  add_file(osad_cmd);
  osad_cmd->add_option("--grid", oracle_grid, "Grid points per axis")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  osad_cmd->callback([&] {
    action = [&](const ProblemFile& file, Output& output) { oracle_saddle(file, oracle_grid, output); };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR usage: " << e.what() << '\n';
    return kExitUsage;
  }

  Output output;
  try {
    const ProblemFile file = load_problem(file_path);
    action(file, output);
  } catch (const UsageError& e) {
    err << "ERROR usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "ERROR " << error_code(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  }

  if (strict && !output.warnings.empty()) {
    err << "ERROR premise: " << output.warnings.size() << " warning(s) with --strict\n";
    for (const auto& w : output.warnings) err << "WARNING: " << w << '\n';
    return kExitPremise;
  }
  if (!out_path.empty() && output.csv) {
    try {
      write_file(out_path, *output.csv);
    } catch (const Error& e) {
      err << "ERROR " << error_code(e.kind()) << ": " << e.what() << '\n';
      return exit_code_for(e.kind());
    }
  }
  for (const auto& w : output.warnings) err << "WARNING: " << w << '\n';
  out << output.report.str();
  return kExitOk;
}

}  // namespace kktscope
