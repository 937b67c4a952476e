#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shuffled::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one command line (without the program name). Subcommands: fit,
/// simulate, sweep, bench, control. Returns 0 on success, 1 on usage or input
/// errors, 2 on numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shuffled::cli
