#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stein::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

/// Parses argv (argv[0] is the program name), runs one subcommand and writes
/// its report to `out` (or to --out when given). Diagnostics go to `err`.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace stein::cli
