// cli.hpp: command-line front end of the cct tool.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cct::cli {

/// Exit codes: 0 success, 1 domain error, 2 usage error.
enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

/// Parses args (args[0] is the program name), runs the verb, and writes
/// results to out and diagnostics to err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cct::cli
