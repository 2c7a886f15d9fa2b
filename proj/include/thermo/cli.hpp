#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermo::cli {

/// Full command-line entry point; args excludes the program name. Returns the
/// process exit code: 0 success, 1 operational error (bad input, missing
/// file), 2 analytic negative outcome (runaway, unreachable target,
/// estimation undefined, refinement failure).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermo::cli
