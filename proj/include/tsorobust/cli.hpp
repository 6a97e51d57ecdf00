#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsorobust {

enum ExitCode { kHolds = 0, kRefuted = 1, kUnknown = 2, kUsage = 3 };

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`; the result is the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsorobust
