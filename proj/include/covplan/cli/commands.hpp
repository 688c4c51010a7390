#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covplan::cli {

// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Runs the tool on args (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count from COVPLAN_THREADS (unset or 0 = automatic).
int threads_from_environment();

}  // namespace covplan::cli
