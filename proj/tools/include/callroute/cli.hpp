#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace callroute {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Runs one `callroute` invocation. `args` excludes the program name.
// Returns the process exit code; never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace callroute
