#pragma once

#include <string>
#include <vector>

namespace gaitrep::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kValidation = 2,
  kNumerical = 3,
  kInfeasible = 4,
};

/// Entry point of the `gaitrep` tool; returns the process exit code.
/// Errors are reported on stderr as a one-line JSON object.
int RunCli(const std::vector<std::string>& args);

}  // namespace gaitrep::cli
