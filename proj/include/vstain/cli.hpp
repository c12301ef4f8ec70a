#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vstain {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2, kExitDivergence = 3 };

/// Runs the tool on argv-style arguments without the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace vstain
