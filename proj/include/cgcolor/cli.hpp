#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cgcolor {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_io = 1,
  exit_usage = 2,  // bad flags or malformed input files
  exit_unsatisfiable = 3,
  exit_unconverged = 4,
  exit_invalid = 5,  // converged, but the decoded labels break a constraint
};

/// Runs the tool on `args` (without the program name). Normal output goes
/// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Installs the stderr logger; level from CGCOLOR_LOG (default "warn").
void setup_logging();

}  // namespace cgcolor
