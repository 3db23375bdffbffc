#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace riskshare::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kValidationError = 2,
  kPreconditionError = 3,
  kNotConverged = 4,
};

/// Runs one command line (without the program name). Reports go to `out`
/// (or to --out), diagnostics to `err`; the return value is the exit code.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riskshare::cli
