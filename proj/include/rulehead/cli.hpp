#ifndef RULEHEAD_CLI_HPP
#define RULEHEAD_CLI_HPP

#include <string>
#include <vector>

namespace rulehead {

// Entry point behind the `rulehead` binary. Exit codes: 0 ok, 1 usage,
// 2 compile/config error, 3 runtime numeric failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace rulehead

#endif  // RULEHEAD_CLI_HPP
