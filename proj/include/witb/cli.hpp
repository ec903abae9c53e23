#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace witb {

// Process exit codes. Stable across releases.
enum class ExitStatus : int {
    success = 0,
    validation_error = 1,
    usage_error = 2,
    internal_error = 3,
};

// Runs `witb <args...>` (args excludes the program name). Reports go to `out`
// unless -o is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace witb
