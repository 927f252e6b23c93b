#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xsplice::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalError = 3,
  kUsage = 64,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xsplice::cli
