#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hypermatch {

/// Version string embedded in every report.
const char* library_version();

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< domain failure: unreadable input, failed construction, ...
inline constexpr int kExitUsage = 2;    ///< bad flags or values

/// Runs one command line (args[0] is the program name). Reports go to the
/// --output file when given, else to `out`; diagnostics go to `err`.
/// Algorithmic verdicts such as "reject" are reported with exit code 0.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hypermatch
