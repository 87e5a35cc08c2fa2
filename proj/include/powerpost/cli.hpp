#ifndef POWERPOST_CLI_HPP
#define POWERPOST_CLI_HPP

#include <string>
#include <vector>

namespace powerpost {

// Command-line driver. args excludes the program name. Returns 0 on
// success, 2 on configuration/usage errors, 3 on numeric errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace powerpost

#endif
