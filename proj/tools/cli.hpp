#pragma once

#include <iosfwd>

namespace rebel::cli {

enum ExitCode : int { kSuccess = 0, kCheckFailed = 1, kInputError = 2, kNumericError = 3 };

/// Runs the command line; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rebel::cli
