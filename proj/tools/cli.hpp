#pragma once

#include <string>
#include <vector>

namespace rscore::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Runs one command line (args[0] is the program name) and returns the
/// process exit code.
int run(const std::vector<std::string>& args);

}  // namespace rscore::cli
