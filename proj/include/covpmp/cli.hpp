#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covpmp {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,          ///< bad arguments, config or I/O
  kExitNotConverged = 2,    ///< shooting, direct optimizer or integration failed
  kExitCheckViolation = 3,  ///< `check` or `compare` found a violated bound
};

/// Runs one subcommand (check, simulate, solve, direct, compare). `args`
/// excludes the program name. Summary lines go to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covpmp
