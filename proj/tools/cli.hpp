#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hstv::cli {

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 1 on a domain error and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

std::string version_string();

} // namespace hstv::cli
