#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prunedoc::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitFullyPruned = 3,
    kExitIo = 4,
    kExitDegenerate = 5,
};

/// Runs the prunedoc command line. `args` excludes the program name.
/// Never throws; failures are reported on `err` and mapped to an exit code.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace prunedoc::cli
