#ifndef PERMLOGIC_TOOLS_CLI_HPP_
#define PERMLOGIC_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace permlogic::cli {

// Exit codes.  Verdicts map to 0/1/2; everything else is >= 3.
inline constexpr int kExitValid = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUnknown = 2;
inline constexpr int kExitUsage = 3;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace permlogic::cli

#endif  // PERMLOGIC_TOOLS_CLI_HPP_
