#pragma once

#include <string>
#include <vector>

namespace cobble {

// The command-line front end: build-db / synthesize / fuzz / stats /
// check. `args` excludes the program name. Returns the process exit
// code: 0 success, 2 configuration or usage error, 1 runtime failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace cobble
