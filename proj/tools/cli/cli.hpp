#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace isoprob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the command line `args` (program name excluded). Results go to `out`
/// (or the --out file), diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace isoprob::cli
