#pragma once

#include <string>
#include <vector>

namespace vprmon {

/// Runs one subcommand. args excludes the program name.
/// Returns 0 on success, 1 on validation/runtime failures, 2 on usage
/// errors (unknown flags, missing subcommand).
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace vprmon
