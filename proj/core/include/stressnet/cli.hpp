#pragma once

#include <string>
#include <vector>

namespace stressnet {

/// Runs one pipeline subcommand. Exit codes: 0 success, 1 validation or
/// usage error, 2 I/O error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace stressnet
