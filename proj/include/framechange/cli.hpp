#pragma once

#include <iosfwd>

namespace framechange {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConstraint = 3;
inline constexpr int kExitNumerical = 4;

// Entry point of the `framechange` tool. Normal output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace framechange
