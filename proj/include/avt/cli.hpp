#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avt::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 2,  // unreadable or invalid inputs, bad flags
  kNotSatisfied = 3,       // no convergence, demand mismatch, failed certification
};

// Runs the `avt` command line. args excludes the program name. Normal
// output goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace avt::cli
