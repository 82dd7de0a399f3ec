#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sepcert::cli {

/// Exit codes: 0 certified/true, 1 refuted/false, 2 unverified, 3 input error.
enum ExitCode : int { kTrue = 0, kFalse = 1, kUnverified = 2, kInputError = 3 };

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sepcert::cli
