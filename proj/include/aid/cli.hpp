#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aid::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kVerificationMismatch = 3,
};

// Subcommands:
//   simulate <scenario> <out.log> [--seed N] [--quiet]
//   metrics <log> [--csv <file>] [--quiet]
//   watchdog <log> [--quiet]
//   verify <log> [--quiet]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aid::cli
