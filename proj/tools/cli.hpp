#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nodalfreq::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidationFailure = 2,
  kNumericalFailure = 3,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nodalfreq::cli
