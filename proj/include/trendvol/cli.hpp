#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trendvol::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kDataError = 2,
  kInfeasibleScheme = 3,
  kTrainingFailure = 4,
  kEvaluationMismatch = 5,
  kUsage = 64,
};

/// Runs one command line (without the program name) and returns its exit code.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace trendvol::cli
