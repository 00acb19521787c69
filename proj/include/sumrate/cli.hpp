#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sumrate::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 computation or filesystem failure, 2 bad usage.
enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2 };

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sumrate::cli
