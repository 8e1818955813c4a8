#pragma once

#include <iosfwd>

namespace trackforge::cli {

// Exit codes of the trackforge executable.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kInternal = 3,
};

// Entry point shared by main() and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trackforge::cli
