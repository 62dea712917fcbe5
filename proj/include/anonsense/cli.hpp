#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace anonsense {

/// Exit codes shared by every verb.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 2;  // validation error or failed check
inline constexpr int kExitResource = 3;  // oracle size guard

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace anonsense
