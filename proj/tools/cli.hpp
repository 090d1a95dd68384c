#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cdt::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, divergence = 3 };

/// Parses `args` (without the program name) and runs the chosen subcommand.
/// Reports go to `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdt::cli
