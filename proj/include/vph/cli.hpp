#pragma once

#include <iosfwd>

namespace vph {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitDataError = 1,
  kExitUsage = 2,
  kExitCheckFailed = 3,
};

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace vph
