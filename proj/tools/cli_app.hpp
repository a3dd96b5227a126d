#ifndef PROJDYN_TOOLS_CLI_APP_HPP
#define PROJDYN_TOOLS_CLI_APP_HPP

#include <ostream>

namespace projdyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the projdyn tool. Subcommands: simulate, check, analyze,
/// list. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace projdyn::cli

#endif  // PROJDYN_TOOLS_CLI_APP_HPP
