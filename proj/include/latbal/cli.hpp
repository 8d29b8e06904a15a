// Batch command-line front end tying the modules together: subcommands for
// model fitting, prediction, balance planning, and the experiment harness.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace latbal {

struct CommandOutcome {
  int exit_code = 0;
  std::vector<std::string> artifacts;  // files written, in write order
};

// Runs one subcommand and returns the process exit code: 0 success,
// 1 unexpected error, 2 config or parse error, 3 fit failure, 4 infeasible
// placement. All human-readable output goes to `out`, errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace latbal
