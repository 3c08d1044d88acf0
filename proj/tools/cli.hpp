#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wpk::cli {

/// Exit codes of every subcommand.
enum ExitCode : int { kConverged = 0, kUsage = 1, kMaxIter = 2, kBreakdown = 3 };

/// Runs `wpk <subcommand> ...`; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wpk::cli
