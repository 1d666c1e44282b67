#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qrecycle {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 1,
  kExitAlgorithmFailed = 2,
  kExitSelfTestFailed = 3,
};

/// Runs one CLI invocation. `args` excludes the program name. The report goes
/// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "1.5", "pi", "2pi", "2*pi", "pi/4" or "-pi/2".
double parse_angle(const std::string& text);

}  // namespace qrecycle
