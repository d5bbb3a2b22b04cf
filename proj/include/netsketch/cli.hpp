#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netsketch::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kPartialSweepFailure = 3,
};

/// Entry point behind the `netsketch` binary. Commands: generate, extract, detect, sweep,
/// bench, pareto. Settings resolve as flags over --config document over defaults.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
/// Same, with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace netsketch::cli
