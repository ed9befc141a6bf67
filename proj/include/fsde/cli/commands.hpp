#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fsde::cli {

enum ExitCode : int { exit_pass = 0, exit_statistical_failure = 1, exit_usage = 2, exit_numerical = 3 };

/// Full command line front end; argv[0] is the program name.
/// Results go to `out` (JSON summaries) and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsde::cli
