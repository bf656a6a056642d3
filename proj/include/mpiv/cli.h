#pragma once

#include <string>
#include <vector>

namespace mpiv {

/// Runs the command-line tool. Exit codes: 0 success, 2 input error,
/// 3 numeric failure.
int run_cli(int argc, const char* const* argv);
int run_cli(std::vector<std::string> args);  // args without the program name

}  // namespace mpiv
