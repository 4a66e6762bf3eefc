#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "kktscope/errors.hpp"

namespace kktscope {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,    // file, schema or expression errors
  kExitNumeric = 3,  // domain errors, zero gradients
  kExitPremise = 4,  // premise violations, or warnings under --strict
};

int exit_code_for(ErrorKind kind);

/// Runs one command. `args` excludes the program name. Reports go to `out`,
/// diagnostics to `err`; the first diagnostic line of any failure is
/// `ERROR <code>: <message>`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fixed 17-significant-digit rendering used by every report and CSV.
std::string format_real(double value);

}  // namespace kktscope
