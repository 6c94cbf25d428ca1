#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spiked {

/// Exit codes of the spiked-unfold tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitTrialFailures = 1,
  kExitUsage = 2,
  kExitIndeterminate = 3,
};

/// Runs the command line `args` (without the program name) in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spiked
