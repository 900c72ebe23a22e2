#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dynassign::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kInfeasibleError = 2;
inline constexpr int kIoError = 3;

// Parses `args` (without the program name) and runs the subcommand. Reports
// go to `out`, diagnostics and usage text to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dynassign::cli
