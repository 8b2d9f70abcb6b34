#pragma once

#include <iosfwd>

namespace ellfit {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `ellfit` tool: subcommands fit, synth, bench, distances.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ellfit
