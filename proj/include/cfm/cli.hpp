#pragma once

#include <cfm/error.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace cfm {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitUsage = 2,
    kExitMissingFile = 3,
    kExitFormat = 4,
    kExitInvalidMesh = 5,
    kExitNumerical = 6,
};

int exit_code_for(Errc code);

/// Runs one subcommand. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cfm
