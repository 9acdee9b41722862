#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace doa::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kUsage = 1, kNotInvertible = 2, kCheckFailed = 3 };

/// Runs the `doa` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace doa::cli
