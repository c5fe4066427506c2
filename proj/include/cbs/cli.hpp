#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbs::cli {

/// Runs one command; args[0] is the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cbs::cli
