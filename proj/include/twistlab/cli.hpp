#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twistlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // computation or I/O error
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. The summary block
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twistlab::cli
