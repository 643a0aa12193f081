#pragma once

#include <iosfwd>

namespace loglap::cli {

enum ExitCode { kOk = 0, kAssertionFailed = 1, kUsageError = 2 };

// Runs the command line. Data goes to `out` unless --output is given;
// diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace loglap::cli
