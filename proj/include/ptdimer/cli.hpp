#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ptdimer::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3 };

/// Runs one command. `args` excludes the program name. A one-line JSON
/// summary goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptdimer::cli
