#pragma once

// Batch front end.
//
//   kgk <subcommand> [--config PATH] [--out PATH] [--seed N] [--threads N]
//
// subcommand: geometry-map | pencil | evolve | stability | demo-examples.
// It may also come from [run] subcommand in the config file. Command-line
// flags override the config.
//
// Exit codes: 0 all enabled checks passed, 1 a check failed, 2 bad
// arguments or configuration.

#include <iosfwd>
#include <string>
#include <vector>

namespace kgk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// args excludes the program name. Primary output goes to --out, or to `out`
/// when no path is configured; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace kgk
