#pragma once

#include <string>
#include <vector>

namespace subspace_uq {

// Exit codes: 0 success, 1 experiment or consistency failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one CLI invocation. args excludes the program name. Exposed as a
// library call so tests can drive the full command surface, including file
// output, without spawning processes.
int run_cli(const std::vector<std::string>& args);

}  // namespace subspace_uq
