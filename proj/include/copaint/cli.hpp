#pragma once

#include <string>
#include <vector>

namespace copaint {

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point behind the command-line tool. Subcommands: train-toy,
/// inpaint, compare, gap-plot. Returns the process exit code: 0 on
/// success, 2 on usage errors (bad flags, malformed inputs, precondition
/// violations), 3 on numeric failures. Exposed as a function so tests can
/// drive the tool in process.
int run_cli(const std::vector<std::string>& args);

}  // namespace copaint
