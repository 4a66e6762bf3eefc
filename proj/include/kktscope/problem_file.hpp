#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kktscope/kkt.hpp"
#include "kktscope/scalarize.hpp"

namespace kktscope {

enum class ProblemKind { kKkt, kScalarize };

/// A validated problem file. Exactly one of `kkt` / `scalarize` is set,
/// matching `kind`.
struct ProblemFile {
  int version = 1;
  ProblemKind kind = ProblemKind::kKkt;
  std::optional<Problem> kkt;
  std::optional<ScalarizationProblem> scalarize;

  std::optional<std::vector<double>> point;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> beta_grid;
  std::optional<std::size_t> inner_grid;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> plot_grid;

  std::vector<std::string> warnings;
};

/// Parses problem-file text. Throws SchemaError with a field path for
/// structural problems and ExpressionError for unparsable expressions.
ProblemFile parse_problem(std::string_view text);

/// Reads and parses a file; IoError if it cannot be read.
ProblemFile load_problem(const std::filesystem::path& path);

}  // namespace kktscope
