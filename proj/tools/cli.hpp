#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcbound_cli {

/// Runs one command line (args[0] is the program name). Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mcbound_cli
