#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cardio::cli {

/// Parses arguments (without the program name) and runs the subcommand.
/// Returns 0 on success, 1 on invalid input or usage, 2 on numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace cardio::cli
