#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "twistrank/error.hpp"

namespace twistrank {

/// Stable process exit statuses.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitOverflow = 3,
    kExitIo = 4,
    kExitNetwork = 5,
};

int exit_code_for(ErrorCode code);

/// Runs the command line `args` (args[0] is the program name). Reports go to
/// `out` unless an --out path is given; diagnostics and summaries without a
/// destination go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twistrank
