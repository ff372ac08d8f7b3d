#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sepwalk {

// Full command-line entry point, separated from main() so tests can drive
// it in-process. args holds everything after the program name. Returns the
// process exit code: 0 on success, 2 on configuration or usage errors, 3 on
// runtime failures. The path of the created output directory is printed to
// out on success; diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace sepwalk
