#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scope::cli {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kParse = 3, kGateway = 4 };

/// One invocation of the command-line tool. `args` excludes the program name.
/// Normal output goes to `out`, diagnostics and the effective config to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Top-level help followed by the help of every subcommand.
std::string full_help();

}  // namespace scope::cli
