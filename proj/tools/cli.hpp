#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace san::cli {

enum ExitCode { ok = 0, config_error = 2, simulation_error = 3, infeasible = 4 };

/// Runs the `san` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace san::cli
