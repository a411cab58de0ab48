#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgf {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitUsage = 2, kExitDiverged = 3 };

/// Entry point of the `sgf` tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a:b:s" (inclusive range) or a comma-separated list.
std::vector<double> parse_fractions(const std::string& spec);

}  // namespace sgf
