#pragma once

// Command-line front end: `mpx pinv|check|gen|bench ...`.

#include <iosfwd>
#include <string>
#include <vector>

namespace mpx::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,      // I/O, parse and shape errors
  kHypothesis = 2,   // hypothesis violation in strict mode
  kInfeasible = 3,   // generator spec cannot be realized
  kUsage = 64,
};

/// Run the CLI with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpx::cli
