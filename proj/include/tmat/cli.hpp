#pragma once

#include <iosfwd>

namespace tmat::cli {

enum ExitCode { Success = 0, ConfigError = 1, ToleranceFailure = 2, NumericalFailure = 3 };

/// Runs `tmat <command> ...` with argv[0] being the program name. The report
/// goes to `out` unless --out names a file; usage and diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmat::cli
