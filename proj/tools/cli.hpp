#ifndef MEDSCHED_TOOLS_CLI_HPP
#define MEDSCHED_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace medsched::cli {

enum ExitCode {
  kOk = 0,
  kFailure = 1,       // I/O, parse or explanation errors; verify found violations
  kUsage = 2,
  kUnsat = 3,
  kNoIncumbent = 4,   // time limit hit before any solution
  kRegression = 5,    // bench: exact peak above greedy peak
};

/// Environment variable holding the default per-solve time limit in seconds.
inline constexpr const char* kTimeLimitEnv = "MEDSCHED_TIME_LIMIT";

/// args excludes the program name. `in` feeds explain-unsat --interactive.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace medsched::cli

#endif  // MEDSCHED_TOOLS_CLI_HPP
