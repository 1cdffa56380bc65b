#pragma once

#include <iosfwd>

namespace lcurve::app {

enum ExitCode : int {
    ok = 0,
    failure = 1,
    config_error = 2,
    numeric_failure = 3,
    invariant_violation = 4,
};

// Entry point of the command-line tool; output goes to `out` unless --out is given.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lcurve::app
